"""Walk through the classification: candidates, rank test, and the seven surfaces.

    python demos/classification_tour.py
"""
from crystal_riemann.classify import classify_all, classify_candidates
from crystal_riemann.lattice import determinant_volume, gram_closed_form, natural_closed_form


def show_matrix(rows, indent="    "):
    cells = [[str(x) for x in r] for r in rows]
    width = max(len(c) for r in cells for c in r)
    for r in cells:
        print(indent + " ".join(c.rjust(width) for c in r))


def main():
    print("Candidates (n, p, q) with phi(n) <= 4")
    print(f"  {'triple':<12}{'bound':>6}{'rank':>6}  verdict")
    for rep in classify_candidates():
        bound = "-" if rep.bound is None else rep.bound
        verdict = "crystallographic" if rep.crystallographic else "rank too large"
        print(f"  {str(rep.triple):<12}{bound:>6}{rep.rank:>6}  {verdict}")

    descs = classify_all()
    print("\nThe seven discrete surfaces")
    print(f"  {'triple':<12}{'G/L':<6}{'lattice':<8}{'g':>3}  {'density':<28}class")
    for d in descs:
        print(f"  {str(d.triple):<12}{d.quotient_tag:<6}{d.root_lattice.display:<8}{d.genus:>3}  "
              f"{str(d.density):<28}{d.periodicity}")

    print("\nLattice data")
    for d in descs:
        which = natural_closed_form(d.params)
        gram = gram_closed_form(d.params, which)
        det, vol = determinant_volume(gram)
        print(f"\n  {d.triple}  closed-form {which}, det M = {det}, |Lambda| = {vol}")
        show_matrix(gram)
        rid = d.root_lattice
        print(f"  witness W with W M_red W^T = {rid.display} (scales {', '.join(map(str, rid.scales))}):")
        show_matrix(rid.witness)
        print(f"  provenance: {d.provenance}")


if __name__ == "__main__":
    main()
