"""
Drawing random networks
=======================

Uniform samples, checked against exact counts, and written out as DOT.
"""

from collections import Counter

from phylolevel import canonical_form, parameters, refined_counts, sample, sample_many, to_dot, unroot
from phylolevel.oracle import generate_all

# all 36 rooted level-1 networks on 3 leaves should turn up about equally often
draws = sample_many("rooted1", 3, 36_000, seed=1)
hist = Counter(canonical_form(x) for x in draws)
print("distinct networks seen:", len(hist), "of", len(generate_all("rooted1", 3)))
print("min/max frequency:", min(hist.values()), max(hist.values()))

# sample mean of the blob count against the exact mean
ks = [parameters(x).k for x in sample_many("rooted2", 10, 2000, seed=7)]
print("empirical", sum(ks) / len(ks), "exact", float(refined_counts("rooted2", 10).mean_k()))

# one network on 8 leaves and its unrooted version
net = sample("rooted2", 8, seed=42)
print(to_dot(net))
print(to_dot(unroot(net)))
