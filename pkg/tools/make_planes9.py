"""Generate the order-9 plane data files in data/planes/.

hall9.txt       derived plane of AG(2,9) w.r.t. the GF(3)-subline slopes
                (the classical derivation; the result is the Hall plane)
dual_hall9.txt  its dual
hughes9.txt     found by searching derivation sets of the dual Hall plane;
                certified by its Fano-quadrangle count differing from both
                PG(2,9) (zero) and the Hall plane

Every output is revalidated against the projective-plane axioms on load;
non-Desarguesian outputs are certified by the existence of a complete
quadrangle with collinear diagonal points (impossible in PG(2,q), q odd).

Run from the repository root:  python3 tools/make_planes9.py
"""

import itertools
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ccstab.planes import FiniteField, dual_plane, dumps_plane, make_plane, pg2

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "planes")


def hall_plane_by_derivation():
    """Derive AG(2,9) with respect to the GF(3) slopes (incl. vertical)."""
    f = FiniteField(9)
    q = 9
    gf3 = [0, 1, 2]  # the prime subfield under the digit encoding
    pt = lambda x, y: x * q + y

    # subspaces W = lam * GF(3)^2; cosets become the new (Baer) lines
    subspaces = set()
    for lam in range(1, q):
        w = frozenset(
            pt(f.mul[lam, a], f.mul[lam, b]) for a in gf3 for b in gf3
        )
        subspaces.add(w)
    subspaces = sorted(subspaces, key=sorted)
    assert len(subspaces) == 4, len(subspaces)

    points = {}  # label -> index
    for x in range(q):
        for y in range(q):
            points[("a", x, y)] = pt(x, y)
    next_id = q * q
    for m in range(q):
        if m not in gf3:
            points[("slope", m)] = next_id
            next_id += 1
    for wi in range(4):
        points[("baer", wi)] = next_id
        next_id += 1

    lines = []
    # kept lines: y = m x + b for slopes outside GF(3)
    for m in range(q):
        if m in gf3:
            continue
        for b in range(q):
            line = [pt(x, f.add[f.mul[m, x], b]) for x in range(q)]
            lines.append(tuple(sorted(line + [points[("slope", m)]])))
    # new lines: cosets of each W
    for wi, w in enumerate(subspaces):
        seen = set()
        for tx in range(q):
            for ty in range(q):
                coset = frozenset(
                    pt(f.add[v // q, tx], f.add[v % q, ty]) for v in w
                )
                if coset not in seen:
                    seen.add(coset)
                    lines.append(tuple(sorted(list(coset) + [points[("baer", wi)]])))
        assert len(seen) == 9
    infinite = [idx for label, idx in points.items() if label[0] != "a"]
    lines.append(tuple(sorted(infinite)))
    return make_plane(q * q + 10, lines)


# --- join/meet tables and the Fano certificate ------------------------------

def tables(plane):
    n = plane.n_points
    inc = plane.incidence()
    join = np.full((n, n), -1, dtype=np.int64)
    for j, line in enumerate(plane.lines):
        members = list(line)
        for u in members:
            for v in members:
                if u != v:
                    join[u, v] = j
    m = len(plane.lines)
    meet = np.full((m, m), -1, dtype=np.int64)
    co = inc.astype(np.int64)
    for j1 in range(m):
        common = co[:, j1][:, None] * co
        for j2 in range(m):
            if j1 != j2:
                meet[j1, j2] = int(np.nonzero(common[:, j2])[0][0])
    return inc, join, meet


def fano_quadrangle_count(plane):
    """Number of complete quadrangles whose diagonal points are collinear
    (zero exactly for the Desarguesian plane in odd characteristic).

    Each unordered quadrangle {a,b,c,d} is seen once per ordered pair split
    ({a,b} then {c,d} and vice versa), i.e. six times, and the collinearity
    of the diagonal triangle is a property of the set.
    """
    n = plane.n_points
    inc, join, meet = tables(plane)
    total = 0
    idx = np.arange(n)
    for a in range(n):
        ja = join[a, :]
        for b in range(a + 1, n):
            lab = join[a, b]
            on_ab = inc[:, lab]
            jb = join[b, :]
            e = meet[lab, np.clip(join, 0, None)]    # e[c, d] = ab ^ cd
            fm = meet[np.clip(ja[:, None], 0, None), np.clip(jb[None, :], 0, None)]
            gm = meet[np.clip(jb[:, None], 0, None), np.clip(ja[None, :], 0, None)]
            ok = (
                ~on_ab[:, None] & ~on_ab[None, :]
                & (idx[:, None] < idx[None, :])      # c < d, c != d
                & ~inc[idx[None, :], np.clip(ja[:, None], 0, None)]  # d not on ac
                & ~inc[idx[None, :], np.clip(jb[:, None], 0, None)]  # d not on bc
                & (e != fm) & (fm != gm) & (e != gm)
                & (e >= 0) & (fm >= 0) & (gm >= 0)
            )
            valid = np.nonzero(ok)
            if len(valid[0]):
                ef_line = join[e[valid], fm[valid]]
                total += int(np.count_nonzero(inc[gm[valid], ef_line]))
    assert total % 6 == 0
    return total // 6


# --- derivation of an abstract plane ----------------------------------------

def derive(plane, ell, dset, inc=None, join=None, meet=None):
    """Derived structure of `plane` w.r.t. line ell and a 4-point derivation
    set on it; returns the derived plane or None if no derivation exists."""
    n = plane.n_points
    if inc is None:
        inc, join, meet = tables(plane)
    dset = tuple(sorted(dset))
    ell_pts = set(plane.lines[ell])
    if any(p not in ell_pts for p in dset):
        return None
    affine = [p for p in range(n) if p not in ell_pts]
    aff_index = {p: i for i, p in enumerate(affine)}

    def direction(u, v):
        return meet[join[u, v], ell]

    def third_on(line_j, u, v, banned):
        for w in plane.lines[line_j]:
            if w != u and w != v and w not in banned:
                return w
        return None

    def baer_through(p, q):
        d1 = direction(p, q)
        for r in affine:
            if r in (p, q):
                continue
            d2 = direction(p, r)
            d3 = direction(q, r)
            if d2 not in dset or d3 not in dset:
                continue
            if len({d1, d2, d3}) != 3:
                continue
            b = _complete_baer(p, q, r, d1, d2, d3)
            if b is not None:
                return b
        return None

    def _complete_baer(p, q, r, d1, d2, d3):
        # p=(0,0), q=(1,0), r=(0,1); d1 rows, d2 columns, d3 anti-diagonal
        p11 = meet[join[q, d2], join[r, d1]]
        if p11 in ell_pts or p11 in (p, q, r):
            return None
        d4 = direction(p, p11)
        if d4 not in dset or d4 in (d1, d2, d3):
            return None
        p22 = meet[join[p, p11], join[q, r]]
        p20 = meet[join[p, q], join[p11, d3]]
        p02 = meet[join[p, r], join[p11, d3]]
        p21 = meet[join[r, d1], join[q, d4]]
        p12 = meet[join[q, d2], join[p, d3]]
        pts = [p, q, r, p11, p22, p20, p02, p21, p12]
        if len(set(pts)) != 9 or any(v in ell_pts for v in pts):
            return None
        for u, v in itertools.combinations(pts, 2):
            if direction(u, v) not in dset:
                return None
            if sum(1 for w in pts if inc[w, join[u, v]]) != 3:
                return None
        return frozenset(pts)

    # quick reject on one pair, then collect all Baer lines
    probe = None
    for p in affine:
        for q in affine:
            if p < q and direction(p, q) in dset:
                probe = (p, q)
                break
        if probe:
            break
    if probe is None or baer_through(*probe) is None:
        return None
    baers = set()
    for p, q in itertools.combinations(affine, 2):
        if direction(p, q) not in dset:
            continue
        if any(p in b and q in b for b in baers):
            continue
        b = baer_through(p, q)
        if b is None:
            return None
        baers.add(b)
    if len(baers) != 36:
        return None
    baers = sorted(baers, key=sorted)
    # parallel classes: components under disjointness
    classes = []
    assigned = {}
    for i, b in enumerate(baers):
        for k, cls in enumerate(classes):
            if all(not (b & baers[j]) for j in cls):
                cls.append(i)
                assigned[i] = k
                break
        else:
            assigned[i] = len(classes)
            classes.append([i])
    if sorted(len(c) for c in classes) != [9, 9, 9, 9]:
        return None

    kept_inf = [p for p in sorted(ell_pts) if p not in dset]
    inf_index = {}
    next_id = len(affine)
    for p in kept_inf:
        inf_index[("old", p)] = next_id
        next_id += 1
    for k in range(len(classes)):
        inf_index[("new", k)] = next_id
        next_id += 1
    new_lines = []
    for j in range(len(plane.lines)):
        if j == ell:
            continue
        inf_pt = meet[j, ell]
        if inf_pt in dset:
            continue
        line = [aff_index[v] for v in plane.lines[j] if v not in ell_pts]
        new_lines.append(tuple(sorted(line + [inf_index[("old", inf_pt)]])))
    for i, b in enumerate(baers):
        line = [aff_index[v] for v in sorted(b)]
        new_lines.append(tuple(sorted(line + [inf_index[("new", assigned[i])]])))
    new_lines.append(tuple(sorted(inf_index.values())))
    try:
        return make_plane(next_id, new_lines)
    except Exception:
        return None


def find_hughes(dual_hall, hall_count, report=print):
    inc, join, meet = tables(dual_hall)
    tried = 0
    for ell in range(len(dual_hall.lines)):
        pts = list(dual_hall.lines[ell])
        for dset in itertools.combinations(pts, 4):
            tried += 1
            derived = derive(dual_hall, ell, dset, inc, join, meet)
            if derived is None:
                continue
            count = fano_quadrangle_count(derived)
            report(f"  derivation ell={ell} D={dset}: plane found, fano={count}")
            if count not in (0, hall_count):
                return derived, count, tried
    return None, None, tried


def main():
    os.makedirs(OUT_DIR, exist_ok=True)

    print("PG(2,9) fano count (expect 0) ...")
    pg = pg2(9)
    pg_count = fano_quadrangle_count(pg)
    print("  fano(PG(2,9)) =", pg_count)
    assert pg_count == 0

    print("building the Hall plane by derivation of AG(2,9) ...")
    hall = hall_plane_by_derivation()
    hall_count = fano_quadrangle_count(hall)
    print("  fano(Hall) =", hall_count)
    assert hall_count > 0, "derived plane is Desarguesian?!"
    with open(os.path.join(OUT_DIR, "hall9.txt"), "w") as fh:
        fh.write(dumps_plane(hall))

    dual_hall = dual_plane(hall)
    dual_count = fano_quadrangle_count(dual_hall)
    print("  fano(dual Hall) =", dual_count, "(duality preserves the count)")
    assert dual_count == hall_count
    with open(os.path.join(OUT_DIR, "dual_hall9.txt"), "w") as fh:
        fh.write(dumps_plane(dual_hall))

    print("sanity: deriving the Hall plane back (expect a Desarguesian result) ...")
    inc, join, meet = tables(hall)
    back = None
    for ell in range(len(hall.lines)):
        for dset in itertools.combinations(hall.lines[ell], 4):
            back = derive(hall, ell, dset, inc, join, meet)
            if back is not None:
                break
        if back is not None:
            break
    assert back is not None, "no derivation set found in the Hall plane"
    print("  fano(derived(Hall)) =", fano_quadrangle_count(back), "(expect 0)")

    print("searching derivation sets of the dual Hall plane for Hughes ...")
    hughes, count, tried = find_hughes(dual_hall, hall_count)
    if hughes is None:
        print(f"  no Hughes candidate after {tried} candidates; not shipping hughes9.txt")
        return
    print(f"  Hughes certified: fano={count} (Hall={hall_count}, PG=0), {tried} candidates tried")
    with open(os.path.join(OUT_DIR, "hughes9.txt"), "w") as fh:
        fh.write(dumps_plane(hughes))


if __name__ == "__main__":
    main()
