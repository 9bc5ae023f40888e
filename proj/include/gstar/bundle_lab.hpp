#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstar/duality.hpp"
#include "gstar/groupoid_build.hpp"

namespace gstar {

// ---------------------------------------------------------------------------
// The parameterized group bundles T and S over X = {1/n} u {0}
// ---------------------------------------------------------------------------
//
// T has fiber Z_{6n+3} in balanced residues over x_n = 1/n for n > 0 and Z
// over x_0 = 0.  S has fiber A_n x Z_{2n+1} with A_n = {-1/n, 0, 1/n} and a
// three-case twisted addition; phi maps T to S fiberwise by balanced
// division m = d(2n+1) + r.  phi is a continuous bijective homomorphism of
// bundles that is not a homeomorphism.

/// Balanced residue of v modulo 2k+1, in {-k..k}.
inline long long balanced_mod(long long v, long long k) {
  long long modulus = 2 * k + 1;
  long long r = v % modulus;
  if (r > k) r -= modulus;
  if (r < -k) r += modulus;
  return r;
}

struct TElement {
  long long m = 0;
  int n = 0;  // fiber index; 0 is the integer fiber at x_0

  double coordinate() const { return n == 0 ? 0.0 : 1.0 / n; }
};

inline TElement make_t(long long m, int n) {
  if (n < 0) throw std::invalid_argument("TElement: fiber index must be >= 0");
  if (n > 0 && std::llabs(m) > 3LL * n + 1)
    throw std::invalid_argument("TElement: m out of the balanced range of Z_(6n+3)");
  return {m, n};
}

inline TElement t_multiply(const TElement& a, const TElement& b) {
  if (a.n != b.n) throw std::invalid_argument("t_multiply: fiber mismatch");
  if (a.n == 0) return {a.m + b.m, 0};
  return {balanced_mod(a.m + b.m, 3LL * a.n + 1), a.n};
}

inline TElement t_invert(const TElement& a) { return {-a.m, a.n}; }

/// Elements of S_n: a = d/n with d in {-1,0,1} (a = 0 at n = 0) and a
/// balanced residue r in Z_{2n+1} (a plain integer at n = 0).
struct SElement {
  int d = 0;       // encodes a = d/n
  long long r = 0;
  int n = 0;

  double a_coordinate() const { return n == 0 ? 0.0 : static_cast<double>(d) / n; }
  double x_coordinate() const { return n == 0 ? 0.0 : 1.0 / n; }
};

inline SElement make_s(int d, long long r, int n) {
  if (n < 0) throw std::invalid_argument("SElement: fiber index must be >= 0");
  if (n == 0) {
    if (d != 0) throw std::invalid_argument("SElement: A_0 = {0}");
    return {0, r, 0};
  }
  if (d < -1 || d > 1) throw std::invalid_argument("SElement: a must lie in A_n");
  if (std::llabs(r) > n) throw std::invalid_argument("SElement: r out of Z_(2n+1)");
  return {d, r, n};
}

/// The three-case twisted addition on S_n; plain addition in the second
/// coordinate at n = 0.
inline SElement s_multiply(const SElement& a, const SElement& b) {
  if (a.n != b.n) throw std::invalid_argument("s_multiply: fiber mismatch");
  int n = a.n;
  if (n == 0) return {0, a.r + b.r, 0};
  long long rsum = a.r + b.r;
  int dsum;
  long long rout;
  if (rsum > n) {
    dsum = static_cast<int>(balanced_mod(a.d + b.d + 1, 1));
    rout = rsum - (2LL * n + 1);
  } else if (rsum < -n) {
    dsum = static_cast<int>(balanced_mod(a.d + b.d - 1, 1));
    rout = rsum + (2LL * n + 1);
  } else {
    dsum = static_cast<int>(balanced_mod(a.d + b.d, 1));
    rout = rsum;
  }
  return {dsum, rout, n};
}

inline SElement s_invert(const SElement& a) { return {a.n == 0 ? 0 : -a.d, -a.r, a.n}; }

/// Balanced division m = d(2n+1) + r with -n <= r <= n; |d| <= 1 whenever
/// |m| <= 3n+1, which covers every element of the balanced fiber Z_{6n+3}.
inline std::pair<long long, long long> balanced_division(long long m, int n) {
  long long r = balanced_mod(m, n);
  long long d = (m - r) / (2LL * n + 1);
  return {d, r};
}

inline SElement phi(const TElement& x) {
  if (x.n == 0) return {0, x.m, 0};
  auto [d, r] = balanced_division(x.m, x.n);
  if (d < -1 || d > 1) throw std::logic_error("phi: balanced division escaped A_n");
  return {static_cast<int>(d), r, x.n};
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

enum class Verdict { CertifiedConvergent, CertifiedEscaping, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::CertifiedConvergent: return "certified-convergent";
    case Verdict::CertifiedEscaping: return "certified-escaping";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// A claim about the sampled range only, never a proof.
struct ConvergenceCertificate {
  int truncation = 0;
  double epsilon = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> distances;  // per index, ambient distance to the candidate limit
  double escape_lower_bound = 0;  // min pairwise distance when escaping
};

struct PhiIsoReport {
  int max_fiber = 0;
  bool bijective = true;
  bool multiplicative = true;
  bool inverse_preserved = true;
  bool ok() const { return bijective && multiplicative && inverse_preserved; }
};

/// Exhaustive fiberwise check that phi_n is a group isomorphism for
/// 1 <= n <= N, plus a sampled window on the integer fiber at n = 0.
inline PhiIsoReport verify_phi_iso_up_to(int N) {
  if (N < 1) throw std::invalid_argument("verify_phi_iso_up_to: N must be >= 1");
  PhiIsoReport rep;
  rep.max_fiber = N;
  for (int n = 1; n <= N; ++n) {
    long long k = 3LL * n + 1;
    std::set<std::pair<int, long long>> image;
    for (long long m = -k; m <= k; ++m) {
      SElement s = phi({m, n});
      image.insert({s.d, s.r});
      SElement si = phi(t_invert({m, n}));
      SElement is = s_invert(s);
      if (si.d != is.d || si.r != is.r) rep.inverse_preserved = false;
    }
    if (static_cast<long long>(image.size()) != 6LL * n + 3) rep.bijective = false;
    for (long long m1 = -k; m1 <= k; ++m1)
      for (long long m2 = -k; m2 <= k; ++m2) {
        SElement lhs = phi(t_multiply({m1, n}, {m2, n}));
        SElement rhs = s_multiply(phi({m1, n}), phi({m2, n}));
        if (lhs.d != rhs.d || lhs.r != rhs.r) rep.multiplicative = false;
      }
  }
  // integer fiber: sampled window
  for (long long m1 = -3LL * N - 1; m1 <= 3LL * N + 1; ++m1)
    for (long long m2 = -5; m2 <= 5; ++m2) {
      SElement lhs = phi(t_multiply({m1, 0}, {m2, 0}));
      SElement rhs = s_multiply(phi({m1, 0}), phi({m2, 0}));
      if (lhs.r != rhs.r) rep.multiplicative = false;
    }
  return rep;
}

/// Ambient Euclidean distance in R x Z x X for S elements.
inline double s_ambient_distance(const SElement& a, const SElement& b) {
  double da = a.a_coordinate() - b.a_coordinate();
  double dr = static_cast<double>(a.r - b.r);
  double dx = a.x_coordinate() - b.x_coordinate();
  return std::sqrt(da * da + dr * dr + dx * dx);
}

/// Ambient Euclidean distance in Z x X for T elements.
inline double t_ambient_distance(const TElement& a, const TElement& b) {
  double dm = static_cast<double>(a.m - b.m);
  double dx = a.coordinate() - b.coordinate();
  return std::sqrt(dm * dm + dx * dx);
}

struct CounterexampleDemo {
  ConvergenceCertificate image;     // phi(2n+1, x_n) -> (0,0,x_0)
  ConvergenceCertificate preimage;  // (2n+1, x_n) escapes
  std::vector<TElement> sequence;
  std::vector<SElement> images;
};

/// The witness sequence of the open-mapping failure: images converge to the
/// identity over x_0 while the preimages leave every bounded set.
inline CounterexampleDemo counterexample_demo(int N, double epsilon = 1e-6) {
  if (N < 2) throw std::invalid_argument("counterexample_demo: N must be >= 2");
  CounterexampleDemo out;
  SElement limit = make_s(0, 0, 0);
  out.image.truncation = N;
  out.image.epsilon = epsilon;
  out.preimage.truncation = N;
  out.preimage.epsilon = epsilon;
  for (int n = 1; n <= N; ++n) {
    TElement t = make_t(2LL * n + 1, n);
    SElement s = phi(t);
    out.sequence.push_back(t);
    out.images.push_back(s);
    out.image.distances.push_back(s_ambient_distance(s, limit));
  }
  bool tail_small = out.image.distances.back() <= std::max(epsilon, 2.0 / N);
  bool decreasing = true;
  for (std::size_t i = 1; i < out.image.distances.size(); ++i)
    decreasing = decreasing && out.image.distances[i] < out.image.distances[i - 1];
  out.image.verdict =
      tail_small && decreasing ? Verdict::CertifiedConvergent : Verdict::Inconclusive;

  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.sequence.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      min_gap = std::min(min_gap, std::abs(static_cast<double>(out.sequence[i].m) -
                                           static_cast<double>(out.sequence[j].m)));
  out.preimage.escape_lower_bound = min_gap;
  out.preimage.verdict = min_gap >= 2.0 ? Verdict::CertifiedEscaping : Verdict::Inconclusive;
  return out;
}

// ---------------------------------------------------------------------------
// Dual-side convergence certification over the T bundle
// ---------------------------------------------------------------------------

/// One term of a dual sequence: character k_n of the fiber Z_{6n+3} at
/// index n >= 1, evaluated at the balanced element m_n.
struct DualSequenceTerm {
  int fiber = 0;       // n >= 1; the fiber over x_0 is out of finite scope
  long long character = 0;
  long long element = 0;
};

using DualSequenceGenerator = std::function<DualSequenceTerm(int)>;

/// Prop-33-style certificate over the sampled range: the base points must
/// converge in X (fiber indices eventually constant, or marching to the
/// fiber over x_0) and the evaluated characters must approach the supplied
/// limit angle within epsilon on the tail.
inline ConvergenceCertificate dual_convergence_check(const DualSequenceGenerator& gen, int N,
                                                     double epsilon, double limit_angle) {
  if (N < 4) throw std::invalid_argument("dual_convergence_check: need a few terms");
  ConvergenceCertificate cert;
  cert.truncation = N;
  cert.epsilon = epsilon;
  Complex limit = std::polar(1.0, limit_angle);
  std::vector<int> fibers;
  for (int i = 1; i <= N; ++i) {
    DualSequenceTerm term = gen(i);
    if (term.fiber < 1) throw std::invalid_argument("dual_convergence_check: fiber out of range");
    long long modulus = 6LL * term.fiber + 3;
    if (std::llabs(term.element) > 3LL * term.fiber + 1)
      throw std::invalid_argument("dual_convergence_check: element leaves the declared fiber");
    double angle = 2.0 * M_PI * static_cast<double>(term.character) *
                   static_cast<double>(term.element) / static_cast<double>(modulus);
    cert.distances.push_back(std::abs(std::polar(1.0, angle) - limit));
    fibers.push_back(term.fiber);
  }
  int tail = std::max(1, N / 4);
  bool constant_tail = true;
  bool escaping_tail = true;  // base points heading to x_0
  for (int i = N - tail; i < N; ++i) {
    constant_tail = constant_tail && fibers[i] == fibers[N - 1];
    escaping_tail = escaping_tail && fibers[i] >= i && (i == N - tail || fibers[i] > fibers[i - 1]);
  }
  bool base_converges = constant_tail || escaping_tail;
  bool tail_ok = true;
  for (int i = N - tail; i < N; ++i) tail_ok = tail_ok && cert.distances[i] <= epsilon;
  cert.verdict =
      base_converges && tail_ok ? Verdict::CertifiedConvergent : Verdict::Inconclusive;
  return cert;
}

}  // namespace gstar
