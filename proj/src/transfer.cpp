#include "pmaps/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace pmaps {

namespace {

double weight_power(double d, double s) { return s == 1.0 ? d : std::pow(d, s); }

}  // namespace

// ---------------------------------------------------------------------------
// Collocation

void CollocationOperator::fill(const PiecewiseMap& T, double s, double x, Side side, std::vector<Term>& out) {
  for (int k = 1; k <= T.size(); ++k) {
    double d = T.inverse_branch_deriv(k, x, side);
    if (d > 0.0) out.push_back({T.inverse_branch(k, x), weight_power(d, s)});
  }
}

CollocationOperator::CollocationOperator(const PiecewiseMap& T, double s, int n_cells)
    : map_(T), s_(s), n_(n_cells) {
  offsets_.reserve(static_cast<std::size_t>(n_) + 2);
  offsets_.push_back(0);
  for (int j = 0; j <= n_; ++j) {
    fill(T, s, static_cast<double>(j) / n_, Side::right, terms_);
    offsets_.push_back(static_cast<std::uint32_t>(terms_.size()));
  }
  mid_offsets_.push_back(0);
  for (int j = 0; j < n_; ++j) {
    fill(T, s, (j + 0.5) / n_, Side::right, mid_terms_);
    mid_offsets_.push_back(static_cast<std::uint32_t>(mid_terms_.size()));
  }
}

GridFunction CollocationOperator::apply(const GridFunction& f) const {
  GridFunction out(n_);
  auto& o = out.values();
  for (std::size_t j = 0; j < o.size(); ++j) {
    double acc = 0.0;
    for (std::uint32_t t = offsets_[j]; t < offsets_[j + 1]; ++t) acc += terms_[t].weight * f(terms_[t].point);
    o[j] = acc;
  }
  return out;
}

std::vector<double> CollocationOperator::apply_midpoints(const GridFunction& f) const {
  std::vector<double> o(static_cast<std::size_t>(n_));
  for (std::size_t j = 0; j < o.size(); ++j) {
    double acc = 0.0;
    for (std::uint32_t t = mid_offsets_[j]; t < mid_offsets_[j + 1]; ++t)
      acc += mid_terms_[t].weight * f(mid_terms_[t].point);
    o[j] = acc;
  }
  return o;
}

double CollocationOperator::apply_at(const GridFunction& f, double x) const {
  std::vector<Term> terms;
  fill(map_, s_, x, Side::right, terms);
  double acc = 0.0;
  for (const Term& t : terms) acc += t.weight * f(t.point);
  return acc;
}

double CollocationOperator::weight_sum_at(double x) const {
  std::vector<Term> terms;
  fill(map_, s_, x, Side::right, terms);
  double acc = 0.0;
  for (const Term& t : terms) acc += t.weight;
  return acc;
}

GridFunction apply_transfer(const PiecewiseMap& T, double s, const GridFunction& f) {
  return CollocationOperator(T, s, f.cells()).apply(f);
}

// ---------------------------------------------------------------------------
// Ulam matrix

double integrate_psi_power(const PiecewiseMap& T, int k, double s, double a, double b, double abs_tol, bool* flagged) {
  if (flagged) *flagged = false;
  if (!(b > a)) return 0.0;
  const Branch& br = T.branch(k);
  if (s == 1.0) return br.psi(b) - br.psi(a);
  auto f = [&](double x) {
    double d = T.inverse_branch_deriv(k, x, Side::right);
    return d > 0.0 ? std::pow(d, s) : 0.0;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0, l1 = 0.0;
  double v = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  if (std::isfinite(v) && err <= abs_tol) return v;
  // Boost's tolerance is relative to the L1 norm of the integrand.
  const double rel = std::max(abs_tol / std::max(l1, 1e-300), 1e-13);
  v = GK::integrate(f, a, b, 8, rel, &err, &l1);
  if (std::isfinite(v) && err <= abs_tol) return v;
  // Endpoint singularities where psi_k' vanishes like a root.
  try {
    static boost::math::quadrature::tanh_sinh<double> ts(10);
    double l1ts = 0.0;
    v = ts.integrate(f, a, b, std::max(abs_tol / std::max(l1, 1e-300), 1e-13), &err, &l1ts);
    if (std::isfinite(v) && err <= abs_tol) return v;
  } catch (const std::exception&) {
  }
  if (flagged) *flagged = true;
  constexpr int panels = 1 << 10;
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) acc += f(a + (p + 0.5) * h);
  return acc * h;
}

UlamMatrix build_ulam(const PiecewiseMap& T, double s, int n) {
  UlamMatrix U;
  U.n = n;
  U.s = s;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(T.size() + 2));
  const double h = 1.0 / n;
  for (int k = 1; k <= T.size(); ++k) {
    const Branch& br = T.branch(k);
    const double ilo = br.image_lo(), ihi = br.image_hi();
    if (!(ihi > ilo)) continue;
    int j0 = std::clamp(static_cast<int>(ilo * n), 0, n - 1);
    int j1 = std::clamp(static_cast<int>(std::ceil(ihi * n)), 1, n);
    for (int j = j0; j < j1; ++j) {
      const double xa = std::max(j * h, ilo), xb = std::min((j + 1) * h, ihi);
      if (!(xb > xa)) continue;
      const double pa = br.psi(xa), pb = br.psi(xb);
      if (!(pb > pa)) continue;
      int i0 = std::clamp(static_cast<int>(pa * n), 0, n - 1);
      int i1 = std::clamp(static_cast<int>(std::ceil(pb * n)), i0 + 1, n);
      for (int i = i0; i < i1; ++i) {
        const double ya = std::max(i * h, pa), yb = std::min((i + 1) * h, pb);
        if (!(yb > ya)) continue;
        double val;
        if (s == 1.0) {
          val = yb - ya;
        } else {
          double u = ya == pa ? xa : std::clamp(br.value(ya), xa, xb);
          double v = yb == pb ? xb : std::clamp(br.value(yb), xa, xb);
          bool flagged = false;
          val = integrate_psi_power(T, k, s, u, v, 1e-10 * h, &flagged);
          if (flagged) ++U.flagged_entries;
        }
        if (val > 0.0) trip.emplace_back(j, i, val * n);
      }
    }
  }
  U.L.resize(n, n);
  U.L.setFromTriplets(trip.begin(), trip.end());
  U.L.makeCompressed();
  return U;
}

std::vector<double> ulam_apply_normalized(const UlamMatrix& U, double gamma, const std::vector<double>& c) {
  Eigen::Map<const Eigen::VectorXd> v(c.data(), static_cast<Eigen::Index>(c.size()));
  Eigen::VectorXd r = (U.L * v) / gamma;
  return std::vector<double>(r.data(), r.data() + r.size());
}

// ---------------------------------------------------------------------------
// Power iteration

namespace {

struct PowerResult {
  Eigen::VectorXd vec;  // non-negative, sums to 1
  double ratio = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool cesaro = false;
};

// Detects a ratio sequence whose increments keep changing sign.
class OscillationDetector {
public:
  bool push(double v) {
    if (have_prev_) {
      double d = v - prev_;
      if (have_diff_ && d * prev_diff_ < 0.0 && std::abs(d) > 1e-15 * std::abs(v)) ++flips_;
      else flips_ = 0;
      prev_diff_ = d;
      have_diff_ = true;
    }
    prev_ = v;
    have_prev_ = true;
    return flips_ >= 20;
  }

private:
  double prev_ = 0.0, prev_diff_ = 0.0;
  bool have_prev_ = false, have_diff_ = false;
  int flips_ = 0;
};

PowerResult power_iterate(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, Eigen::VectorXd x,
                          double tol, int max_iter) {
  PowerResult r;
  x /= x.sum();
  OscillationDetector osc;
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(x.size());
  long avg_count = 0;
  auto residual_of = [&](const Eigen::VectorXd& v, double* ratio) {
    Eigen::VectorXd y = op(v);
    *ratio = y.sum() / v.sum();
    return (y - *ratio * v).lpNorm<1>() / v.lpNorm<1>();
  };
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = op(x);
    double ratio = y.sum();
    x = y / ratio;
    r.iterations = it;
    if (!r.cesaro && osc.push(ratio)) r.cesaro = true;
    if (r.cesaro) {
      avg += x;
      ++avg_count;
    }
    if (it % 10 == 0 || it == max_iter) {
      const Eigen::VectorXd& cand = r.cesaro ? Eigen::VectorXd(avg / static_cast<double>(avg_count)) : x;
      double rr = 0.0;
      double res = residual_of(cand, &rr);
      if (res <= tol || it == max_iter) {
        r.vec = cand / cand.sum();
        r.ratio = rr;
        r.residual = res;
        r.converged = res <= tol;
        return r;
      }
    }
  }
  r.vec = x;
  r.residual = residual_of(x, &r.ratio);
  return r;
}

}  // namespace

SpectralResult leading_spectrum(const UlamMatrix& U, double tol, int max_iter, double beta) {
  const int n = U.n;
  const auto& L = U.L;
  Eigen::SparseMatrix<double, Eigen::ColMajor> Lt = L.transpose();
  auto right = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return L * v; };
  auto left = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return Lt * v; };

  PowerResult pl = power_iterate(left, Eigen::VectorXd::Constant(n, 1.0 / n), tol, max_iter);
  PowerResult pr = power_iterate(right, Eigen::VectorXd::Ones(n), tol, max_iter);

  SpectralResult res;
  Eigen::VectorXd rowsum = L * Eigen::VectorXd::Ones(n);
  res.gamma = pl.vec.dot(rowsum);
  res.ms_weights.assign(pl.vec.data(), pl.vec.data() + n);
  res.residual_left = pl.residual;
  res.residual_right = pr.residual;
  res.iterations_left = pl.iterations;
  res.iterations_right = pr.iterations;
  res.converged = pl.converged && pr.converged;
  res.cesaro_engaged = pl.cesaro || pr.cesaro;

  std::vector<double> gcells(pr.vec.data(), pr.vec.data() + n);
  GridFunction g = from_cell_values(gcells);
  double mass = integrate(g, res.ms_weights);
  if (mass > 0.0) g *= 1.0 / mass;
  res.density = std::move(g);

  // Peripheral spectrum: deflate the leading pair and look for further
  // eigenvalues of modulus at least (1 - 10 tol) gamma.
  {
    Eigen::VectorXd gv = pr.vec / pl.vec.dot(pr.vec);
    const double threshold = (1.0 - 10.0 * tol) * res.gamma;
    std::vector<Eigen::VectorXd> found;
    int count = 1;
    for (int defl = 0; defl < 8; ++defl) {
      Eigen::VectorXd v(n);
      for (int j = 0; j < n; ++j) v[j] = std::sin(1.0 + 7.0 * j + 3.0 * defl);
      auto step = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y = L * x - res.gamma * gv * pl.vec.dot(x);
        for (const auto& u : found) y -= u * u.dot(y);
        return y;
      };
      constexpr int burn = 50, span = 200;
      double log_growth = 0.0;
      bool degenerate = false;
      for (int it = 0; it < burn + span; ++it) {
        double before = v.norm();
        if (!(before > 1e-300)) {
          degenerate = true;
          break;
        }
        v = step(v / before);
        if (it >= burn) log_growth += std::log(std::max(v.norm(), 1e-300));
      }
      if (degenerate) break;
      double rate = std::exp(log_growth / span);
      if (!(rate >= threshold)) break;
      ++count;
      found.push_back(v.normalized());
    }
    res.peripheral_count = count;
  }

  // Support estimate and atom detection.
  std::vector<double> sorted = res.ms_weights;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double cut = (10.0 / n) * sorted[static_cast<std::size_t>(n / 2)];
  for (int j = 0; j < n; ++j) {
    if (res.ms_weights[static_cast<std::size_t>(j)] <= cut) continue;
    double lo = static_cast<double>(j) / n, hi = static_cast<double>(j + 1) / n;
    if (!res.support_estimate.empty() && res.support_estimate.back().second == lo) res.support_estimate.back().second = hi;
    else res.support_estimate.emplace_back(lo, hi);
  }
  int c = std::clamp(static_cast<int>(std::lround(beta * n)), 1, n);
  int a = c == n ? n - 2 : c - 1;
  double near = 0.0;
  for (int j = std::max(a, 0); j <= std::min(a + 1, n - 1); ++j) near += res.ms_weights[static_cast<std::size_t>(j)];
  res.ms_near_atomic = near > 0.99;
  return res;
}

double collocation_gamma(const CollocationOperator& F, double tol, int max_iter) {
  GridFunction f(F.cells(), 1.0);
  double prev = 0.0;
  int stable = 0;
  double ratio = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    GridFunction g = F.apply(f);
    double sf = std::accumulate(f.values().begin(), f.values().end(), 0.0);
    double sg = std::accumulate(g.values().begin(), g.values().end(), 0.0);
    ratio = sg / sf;
    g *= 1.0 / ratio;
    f = std::move(g);
    if (std::abs(ratio - prev) <= tol * ratio) {
      if (++stable >= 3) break;
    } else {
      stable = 0;
    }
    prev = ratio;
  }
  return ratio;
}

// ---------------------------------------------------------------------------
// Densities and probes

DensityResult invariant_density(const CollocationOperator& F, const std::vector<double>& w, double tol,
                                int max_iter) {
  DensityResult r;
  GridFunction f(F.cells(), 1.0);
  f *= 1.0 / integrate(f, w);
  GridFunction avg(F.cells(), 0.0), prev_avg(F.cells(), 0.0);
  long avg_count = 0;
  OscillationDetector osc;
  for (int it = 1; it <= max_iter; ++it) {
    GridFunction g = F.apply(f);
    g *= 1.0 / integrate(g, w);
    double diff = l1_norm(g - f, w);
    f = std::move(g);
    r.iterations = it;
    if (!r.cesaro_engaged && osc.push(diff)) r.cesaro_engaged = true;
    if (r.cesaro_engaged) {
      prev_avg = avg;
      avg += f;
      ++avg_count;
      if (avg_count > 1) {
        GridFunction a1 = (1.0 / static_cast<double>(avg_count)) * avg;
        GridFunction a0 = (1.0 / static_cast<double>(avg_count - 1)) * prev_avg;
        if (l1_norm(a1 - a0, w) < tol) {
          r.converged = true;
          f = a1;
          break;
        }
      }
    } else if (diff < tol) {
      r.converged = true;
      break;
    }
  }
  if (r.cesaro_engaged && !r.converged && avg_count > 0) f = (1.0 / static_cast<double>(avg_count)) * avg;
  f *= 1.0 / integrate(f, w);
  r.in_cone = is_nonincreasing(f, 1e-6) && is_nonnegative(f, 1e-12);
  r.density = std::move(f);
  return r;
}

GridFunction restrict_density_gbeta(const GridFunction& g, double beta, const std::vector<double>& w) {
  double A = integrate_on(g, w, 0.0, beta);
  if (!(A > 1e-12)) throw DensityVanishes();
  GridFunction r(g.cells(), 0.0);
  for (int j = 0; j <= g.cells(); ++j)
    if (g.node(j) <= beta + 1e-15) r[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j)] / A;
  return r;
}

std::vector<GridFunction> random_cone_functions(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pieces(1, 5);
  std::vector<GridFunction> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    GridFunction f(n, unit(rng));
    int m = pieces(rng);
    for (int p = 0; p < m; ++p) {
      double t = unit(rng), a = unit(rng);
      if (unit(rng) < 0.5) {
        f += a * GridFunction::indicator(n, 0.0, t);
      } else {
        double len = std::max(t, 1e-3);
        f += a * GridFunction::sample(n, [len](double x) { return std::max(0.0, 1.0 - x / len); });
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

LasotaYorkeResult lasota_yorke_probe(const CollocationOperator& F, double gamma, double t_prime_0,
                                     const std::vector<double>& w, int samples, std::uint64_t seed) {
  LasotaYorkeResult r;
  r.alpha = 0.5 * (1.0 / t_prime_0 + 1.0);
  r.seed = seed;
  std::vector<GridFunction> fs = random_cone_functions(F.cells(), samples, seed);
  fs.insert(fs.begin(), GridFunction(F.cells(), 1.0));
  r.samples = static_cast<int>(fs.size());
  std::vector<double> vf, vff, nf;
  r.b_hat = -std::numeric_limits<double>::infinity();
  for (const GridFunction& f : fs) {
    GridFunction g = F.apply(f);
    g *= 1.0 / gamma;
    vf.push_back(bv_variation(f));
    vff.push_back(bv_variation(g));
    nf.push_back(l1_norm(f, w));
    r.b_hat = std::max(r.b_hat, (vff.back() - r.alpha * vf.back()) / nf.back());
  }
  r.pass = std::isfinite(r.b_hat);
  for (std::size_t i = 0; i < fs.size() && r.pass; ++i)
    if (vff[i] > r.alpha * vf[i] + r.b_hat * nf[i] + 1e-12 * (1.0 + vff[i])) r.pass = false;
  return r;
}

std::vector<std::vector<double>> hulse_probe(const CollocationOperator& F, const std::vector<double>& breakpoints,
                                             double gamma, int n_iter) {
  std::vector<std::vector<double>> out;
  const int n = F.cells();
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    GridFunction f = GridFunction::indicator(n, 0.0, breakpoints[k]);
    std::vector<double> gaps;
    for (int m = 1; m <= n_iter; ++m) {
      f = F.apply(f);
      f *= 1.0 / gamma;
      gaps.push_back(f[0] - f[static_cast<std::size_t>(n)]);
    }
    out.push_back(std::move(gaps));
  }
  return out;
}

}  // namespace pmaps
