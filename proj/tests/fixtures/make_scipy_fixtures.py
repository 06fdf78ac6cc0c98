# Regenerates scipy_fixtures.hpp. Values are frozen; rerun only to audit.
import numpy as np
import scipy
from scipy import stats

rng = np.random.default_rng(20240611)
out = ["#pragma once", "// Generated by make_scipy_fixtures.py with scipy " + scipy.__version__ + ".", "",
       "#include <vector>", "", "namespace fixtures {", "",
       "struct PairedCase {", "  std::vector<double> a, b;", "  double statistic, p_two, p_greater, p_less;", "};", "",
       "struct TwoSampleCase {", "  std::vector<double> x, y;", "  double statistic, p_two, p_greater, p_less;", "};", ""]

def vec(v):
    return "{" + ", ".join(repr(float(x)) for x in v) + "}"

def paired(name, cases):
    out.append(f"inline const std::vector<PairedCase> {name} = {{")
    for a, b, r in cases:
        out.append(f"    {{{vec(a)},\n     {vec(b)},\n     {r[0]!r}, {r[1]!r}, {r[2]!r}, {r[3]!r}}},")
    out.append("};\n")

def two(name, cases):
    out.append(f"inline const std::vector<TwoSampleCase> {name} = {{")
    for a, b, r in cases:
        out.append(f"    {{{vec(a)},\n     {vec(b)},\n     {r[0]!r}, {r[1]!r}, {r[2]!r}, {r[3]!r}}},")
    out.append("};\n")

t_cases = []
for n, shift in [(8, 0.3), (20, 0.05), (40, -0.1)]:
    a = np.round(rng.normal(0.8, 0.1, n), 4)
    b = np.round(a - shift * 0.1 + rng.normal(0, 0.05, n), 4)
    two_s = stats.ttest_rel(a, b)
    g = stats.ttest_rel(a, b, alternative="greater").pvalue
    l = stats.ttest_rel(a, b, alternative="less").pvalue
    t_cases.append((a, b, (float(two_s.statistic), float(two_s.pvalue), float(g), float(l))))
paired("kPairedT", t_cases)

def wil(a, b, method):
    kw = dict(zero_method="wilcox", correction=(method == "approx"), method=method)
    s = stats.wilcoxon(a, b, **kw)
    g = stats.wilcoxon(a, b, alternative="greater", **kw).pvalue
    l = stats.wilcoxon(a, b, alternative="less", **kw).pvalue
    return (float(s.statistic), float(s.pvalue), float(g), float(l))

w_exact = []
for n in (6, 10, 15):
    a = rng.normal(0, 1, n); b = a - 0.3 - rng.normal(0, 1, n)
    a = np.round(a, 6); b = np.round(b, 6)
    w_exact.append((a, b, wil(a, b, "exact")))
paired("kWilcoxonExact", w_exact)

w_approx = []
for n in (25, 40, 60):
    a = np.round(rng.normal(0, 1, n), 1); b = np.round(a - rng.normal(0.2, 1, n), 1)
    w_approx.append((a, b, wil(a, b, "approx")))
paired("kWilcoxonApprox", w_approx)

def mwu(x, y, method):
    kw = dict(method=method, use_continuity=True)
    s = stats.mannwhitneyu(x, y, alternative="two-sided", **kw)
    g = stats.mannwhitneyu(x, y, alternative="greater", **kw).pvalue
    l = stats.mannwhitneyu(x, y, alternative="less", **kw).pvalue
    return (float(s.statistic), float(s.pvalue), float(g), float(l))

m_exact = []
for n, m in ((4, 6), (7, 8), (8, 12)):
    x = np.round(rng.normal(0.3, 1, n), 6); y = np.round(rng.normal(0, 1, m), 6)
    m_exact.append((x, y, mwu(x, y, "exact")))
two("kMannWhitneyExact", m_exact)

m_approx = []
for n, m in ((15, 12), (36, 36), (25, 40)):
    x = np.round(rng.normal(0.2, 1, n), 1); y = np.round(rng.normal(0, 1, m), 1)
    m_approx.append((x, y, mwu(x, y, "asymptotic")))
two("kMannWhitneyApprox", m_approx)

out.append("}  // namespace fixtures")
open("scipy_fixtures.hpp", "w").write("\n".join(out) + "\n")
