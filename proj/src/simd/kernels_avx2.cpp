// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "kernels_impl.hpp"
#include "scalar_math.hpp"
#include "semcode/lambert_w.hpp"

namespace semcode::simd::avx2 {

namespace {

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline __m256d pow2i(__m128i k) {
  __m256i k64 = _mm256_cvtepi32_epi64(k);
  k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
  return _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
}

// exp(x), Cody-Waite reduction to |r| <= ln2/2 and a degree-13 Taylor
// polynomial (truncation error below 5e-18). Inputs are clamped to the
// finite-result range.
inline __m256d exp_pd(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, set1(-745.1332191019412)),
                    set1(709.782712893384));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, set1(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, set1(1.90821492927058770002e-10), r);

  __m256d p = set1(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, set1(0.5));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0));

  // Two half-size scale factors keep both in the normal range for n in
  // [-1075, 1024].
  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i n1 = _mm_srai_epi32(ni, 1);
  const __m128i n2 = _mm_sub_epi32(ni, n1);
  return _mm256_mul_pd(_mm256_mul_pd(p, pow2i(n1)), pow2i(n2));
}

// log(x) for x > 0, fdlibm's reduction m in [sqrt(2)/2, sqrt(2)) with the same
// minimax coefficients. x == 0 yields -inf.
inline __m256d log_pd(__m256d x) {
  const __m256d zero_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
  const __m256d sub_mask =
      _mm256_cmp_pd(x, set1(2.2250738585072014e-308), _CMP_LT_OQ);
  x = _mm256_blendv_pd(x, _mm256_mul_pd(x, set1(18014398509481984.0)), sub_mask);
  const __m256d e_adj = _mm256_and_pd(sub_mask, set1(-54.0));

  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i ebits = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(
          _mm256_or_si256(ebits, _mm256_set1_epi64x(0x4330000000000000LL))),
      set1(4503599627370496.0 + 1023.0));
  const __m256i mbits =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FF0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mbits);
  const __m256d big = _mm256_cmp_pd(m, set1(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, set1(0.5)), big);
  e = _mm256_add_pd(_mm256_add_pd(e, _mm256_and_pd(big, set1(1.0))), e_adj);

  const __m256d f = _mm256_sub_pd(m, set1(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(set1(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  __m256d r = set1(1.479819860511658591e-01);
  r = _mm256_fmadd_pd(r, z, set1(1.531383769920937332e-01));
  r = _mm256_fmadd_pd(r, z, set1(1.818357216161805012e-01));
  r = _mm256_fmadd_pd(r, z, set1(2.222219843214978396e-01));
  r = _mm256_fmadd_pd(r, z, set1(2.857142874366239149e-01));
  r = _mm256_fmadd_pd(r, z, set1(3.999999999940941908e-01));
  r = _mm256_fmadd_pd(r, z, set1(6.666666666666735130e-01));
  r = _mm256_mul_pd(r, z);
  const __m256d hfsq = _mm256_mul_pd(set1(0.5), _mm256_mul_pd(f, f));
  // e*ln2_hi - ((hfsq - (s*(hfsq+R) + e*ln2_lo)) - f)
  const __m256d inner = _mm256_fmadd_pd(e, set1(1.90821492927058770002e-10),
                                        _mm256_mul_pd(s, _mm256_add_pd(hfsq, r)));
  const __m256d res = _mm256_fmsub_pd(
      e, set1(6.93147180369123816490e-01),
      _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));
  return _mm256_blendv_pd(res, set1(-HUGE_VAL), zero_mask);
}

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(set1(-0.0), x);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Four lanes of W0(exp(t)); same guess and stopping rule as the scalar
// reference.
inline __m256d w0_exp_block(__m256d t) {
  const __m256d mid_t = _mm256_min_pd(t, set1(1.5));
  const __m256d l = log_pd(_mm256_add_pd(set1(1.0), exp_pd(mid_t)));
  const __m256d winitzki = _mm256_mul_pd(
      l, _mm256_sub_pd(set1(1.0), _mm256_div_pd(log_pd(_mm256_add_pd(set1(1.0), l)),
                                                _mm256_add_pd(set1(2.0), l))));
  const __m256d guess_mid = log_pd(winitzki);

  const __m256d big_t = _mm256_max_pd(t, set1(1.5));
  const __m256d lt = log_pd(big_t);
  const __m256d guess_big =
      log_pd(_mm256_add_pd(_mm256_sub_pd(big_t, lt), _mm256_div_pd(lt, big_t)));

  const __m256d guess_neg = _mm256_sub_pd(t, exp_pd(t));

  __m256d v = _mm256_blendv_pd(guess_mid, guess_big,
                               _mm256_cmp_pd(t, set1(1.5), _CMP_GE_OQ));
  v = _mm256_blendv_pd(v, guess_neg, _mm256_cmp_pd(t, set1(-20.0), _CMP_LT_OQ));

  __m256d done = _mm256_setzero_pd();
  for (int it = 0; it < detail::kMaxHalley; ++it) {
    const __m256d ev = exp_pd(v);
    const __m256d g = _mm256_sub_pd(_mm256_add_pd(ev, v), t);
    const __m256d gp = _mm256_add_pd(ev, set1(1.0));
    const __m256d num = _mm256_mul_pd(set1(2.0), _mm256_mul_pd(g, gp));
    const __m256d den = _mm256_fmsub_pd(_mm256_mul_pd(set1(2.0), gp), gp,
                                        _mm256_mul_pd(g, ev));
    const __m256d dv = _mm256_andnot_pd(done, _mm256_div_pd(num, den));
    v = _mm256_sub_pd(v, dv);
    const __m256d tol = _mm256_mul_pd(set1(detail::kW0ExpTol),
                                      _mm256_max_pd(set1(1.0), abs_pd(v)));
    done = _mm256_or_pd(done, _mm256_cmp_pd(abs_pd(dv), tol, _CMP_LE_OQ));
    if (_mm256_movemask_pd(done) == 0xF) break;
  }
  const __m256d w = exp_pd(v);
  const __m256d r = _mm256_sub_pd(_mm256_add_pd(w, log_pd(w)), t);
  const __m256d polished =
      _mm256_sub_pd(w, _mm256_div_pd(_mm256_mul_pd(r, w), _mm256_add_pd(set1(1.0), w)));
  return _mm256_blendv_pd(w, polished, _mm256_cmp_pd(t, set1(1.0), _CMP_GT_OQ));
}

// One Newton step on w e^w = y.
inline __m256d polish_w0(__m256d w, __m256d y) {
  const __m256d ew = exp_pd(w);
  const __m256d f = _mm256_fmsub_pd(w, ew, y);
  return _mm256_sub_pd(w, _mm256_div_pd(f, _mm256_mul_pd(ew, _mm256_add_pd(set1(1.0), w))));
}

}  // namespace

void lambert_w0_exp(const double* t, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, w0_exp_block(_mm256_loadu_pd(t + i)));
  }
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, t + i, (n - i) * sizeof(double));
    _mm256_store_pd(buf, w0_exp_block(_mm256_load_pd(buf)));
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

void lambert_w0(const double* y, double* out, std::size_t n) {
  alignas(32) double buf[4];
  for (std::size_t i = 0; i < n; i += 4) {
    const std::size_t m = std::min<std::size_t>(4, n - i);
    for (std::size_t j = 0; j < 4; ++j) buf[j] = j < m ? y[i + j] : 1.0;
    const __m256d yv = _mm256_load_pd(buf);
    // Non-positive lanes go through log(1) and are patched below.
    const __m256d pos = _mm256_cmp_pd(yv, _mm256_setzero_pd(), _CMP_GT_OQ);
    const __m256d safe = _mm256_blendv_pd(set1(1.0), yv, pos);
    const __m256d w = _mm256_and_pd(pos, polish_w0(w0_exp_block(log_pd(safe)), safe));
    _mm256_store_pd(buf, w);
    for (std::size_t j = 0; j < m; ++j) {
      const double yj = y[i + j];
      out[i + j] = yj < 0.0 ? semcode::lambert_w0(yj) : buf[j];
    }
  }
}

double sum_exp_shifted(const double* w, std::size_t n, double offset) {
  const __m256d off = set1(offset);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(off, _mm256_loadu_pd(w + i))));
  }
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, w + i, (n - i) * sizeof(double));
    const __m256i lane = _mm256_setr_epi64x(0, 1, 2, 3);
    const __m256d live = _mm256_castsi256_pd(
        _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(n - i)), lane));
    const __m256d e = exp_pd(_mm256_sub_pd(off, _mm256_load_pd(buf)));
    acc = _mm256_add_pd(acc, _mm256_and_pd(live, e));
  }
  return hsum(acc);
}

Moments weighted_moments(const double* p, const double* len, std::size_t n) {
  __m256d m1 = _mm256_setzero_pd();
  __m256d m2 = _mm256_setzero_pd();
  __m256d kr = _mm256_setzero_pd();
  const __m256d neg_ln2 = set1(-0.69314718055994530942);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pv = _mm256_loadu_pd(p + i);
    const __m256d lv = _mm256_loadu_pd(len + i);
    const __m256d pl = _mm256_mul_pd(pv, lv);
    m1 = _mm256_add_pd(m1, pl);
    m2 = _mm256_fmadd_pd(pl, lv, m2);
    kr = _mm256_add_pd(kr, exp_pd(_mm256_mul_pd(neg_ln2, lv)));
  }
  Moments out{hsum(m1), hsum(m2), hsum(kr)};
  for (; i < n; ++i) {
    out.mean += p[i] * len[i];
    out.mean_sq += p[i] * len[i] * len[i];
    out.kraft += std::exp2(-len[i]);
  }
  return out;
}

}  // namespace semcode::simd::avx2
