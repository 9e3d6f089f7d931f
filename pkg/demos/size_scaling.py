"""Filtration size and time of the three pipelines as the input grows.

The restricted nerve grows linearly with the number of polygons and the full
nerve cubically; the grid sample sits in between and depends on epsilon.
"""

import math

from offsetnerve import random_sites, run_pipeline

print(f"{'n':>5} {'vertices':>8} {'restricted':>16} {'sample(0.5)':>16} {'cech':>18}")
for n in (10, 50, 100, 200):
    sites = random_sites(n, seed=n)
    cells = []
    for pipeline, eps in (("restricted", None), ("sample", 0.5), ("cech", None)):
        if pipeline == "cech" and n > 100:
            cells.append(f"{n + math.comb(n, 2) + math.comb(n, 3)} (skipped)")
            continue
        res = run_pipeline(sites, pipeline, eps)
        cells.append(f"{res.filtration_size} {res.total_time:6.2f}s")
    print(f"{n:>5} {sites.n_vertices:>8} {cells[0]:>16} {cells[1]:>16} {cells[2]:>18}")
