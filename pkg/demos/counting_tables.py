"""
Counting phylogenetic networks by leaves
========================================

Exact counts for the four classes, then a look at how blobs and
blob arcs are spread across the networks of one size.
"""

from phylolevel import NetworkClass, closed_count, count, refined_counts

# counts for 1..10 leaves; unrooted classes need at least two leaves
for cls in NetworkClass:
    row = [count(cls, cls.index(l)) if cls.index(l) >= 1 else 0 for l in range(1, 11)]
    print(f"{cls.value:>10}", row)

# the explicit sum formula gives the same numbers
assert all(closed_count(cls, 25) == count(cls, 25) for cls in NetworkClass)

# how many rooted level-1 networks on 6 leaves have k blobs?
table = refined_counts("rooted1", 6)
by_k = {}
for (k, m), c in table.entries.items():
    by_k[k] = by_k.get(k, 0) + c
print("blobs:", dict(sorted(by_k.items())), "total", table.total)
print("mean number of blobs:", float(table.mean_k()))
