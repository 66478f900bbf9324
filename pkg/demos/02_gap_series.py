"""Gap series: norms you can read off the coefficients.

For a lacunary series sum b_k z^{m_k} with m_{k+1} >= c m_k, the N_p norm
squared is comparable to sum |b_k|^2 / m_k^(p+1). We check that on
truncations, then use two explicit series to separate N_0.5 from N_1.
"""

from npball import GapSpec, equivalence_report, gap_np_rhs, gap_np_series_value, separation_witnesses
from npball.gap import dyadic_bracket, membership_table

spec = GapSpec()  # b_k = 1, m_k = 2^k
rep = equivalence_report(spec, 0.5, 0.5, (6, 8, 10, 12))
print("K   ||f_K||^2   sum b^2/m^(p+1)   ratio")
for row in rep.rows:
    print(f"{row.K:<3d} {row.norm_sq:10.6f}  {row.np_rhs:14.6f}   {row.norm_sq / row.np_rhs:.4f}")
print(f"ratio spread {rep.np_spread:.3f}, A^-q spread {rep.aq_spread:.3f}")

# at p = 1 the coefficient sum is a plain geometric series
print("p=1 partial sum at K=12:", gap_np_rhs(spec, 1.0, 12).value, "limit", gap_np_series_value(spec, 1.0))

f1, f2 = separation_witnesses(1, 0.5, 1.0)
s = gap_np_rhs(f2, 0.5, 12)
print(f"f2 at p=0.5: partial sums {s.partials[:4]}... divergent={s.divergent}")
print(f"f2 at p=1: series value {gap_np_series_value(f2, 1.0):.6f}")
for name, row in membership_table(1, 0.5, 1.0)["verdicts"].items():
    print(name, row)

# grouping terms by dyadic block changes the sum by a bounded factor only
print("dyadic bracket for c=1.5, p=1:", dyadic_bracket(1.5, 1.0))
