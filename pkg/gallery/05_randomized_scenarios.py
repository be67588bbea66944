"""
Randomized invariance scenarios
===============================

Each scenario draws random marker data, a random translation and a random
response, fits under both codings and records whether fitted values and
top-degree coefficients agree. Scenarios C1-C4 and R should always agree;
E3a-E3c and X should produce at least one clear disagreement.
"""

import polypen as pp

summary = pp.corollary_suite(seed=0, trials=20)
print(summary.to_text())
