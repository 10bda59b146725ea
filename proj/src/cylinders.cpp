#include "pmaps/cylinders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmaps {

bool cylinder_contains(double lo, double hi, double beta) {
  if (lo <= beta && beta < hi) return true;
  return beta >= 1.0 && hi >= 1.0 && lo < hi;
}

std::vector<Cylinder> refine_partition(const PiecewiseMap& T, int r, double beta) {
  if (r < 1) throw std::invalid_argument("cylinder depth must be at least 1");
  std::vector<Cylinder> cur;
  for (int k = 1; k <= T.size(); ++k) {
    const Branch& b = T.branch(k);
    cur.push_back({{k}, b.lo(), b.hi(), false});
  }
  for (int depth = 2; depth <= r; ++depth) {
    std::vector<Cylinder> next;
    for (int d = 1; d <= T.size(); ++d) {
      const Branch& b = T.branch(d);
      for (const Cylinder& c : cur) {
        double lo = std::max(c.lo, b.image_lo()), hi = std::min(c.hi, b.image_hi());
        if (!(hi - lo > 1e-13)) continue;
        Cylinder n;
        n.word.reserve(static_cast<std::size_t>(depth));
        n.word.push_back(d);
        n.word.insert(n.word.end(), c.word.begin(), c.word.end());
        n.lo = b.psi(lo);
        n.hi = b.psi(hi);
        if (n.hi > n.lo) next.push_back(std::move(n));
      }
    }
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end(), [](const Cylinder& a, const Cylinder& b) { return a.lo < b.lo; });
  for (Cylinder& c : cur) c.contains_beta = cylinder_contains(c.lo, c.hi, beta);
  return cur;
}

std::vector<int> cylinder_containing(const PiecewiseMap& T, double x, int r) {
  std::vector<int> word;
  for (int i = 0; i < r; ++i) {
    word.push_back(T.branch_index(x, Side::right));
    x = T.apply(x, Side::right);
  }
  return word;
}

ConditionBResult condition_B_probe(const CollocationOperator& F, const PiecewiseMap& T, double gamma, double beta,
                                   int r_max, int n_max) {
  ConditionBResult res;
  const int n = F.cells();
  const double inv_gamma = 1.0 / gamma;
  for (int r = 1; r <= r_max; ++r) {
    std::vector<double> vals;
    for (const Cylinder& c : refine_partition(T, r, beta)) {
      if (c.contains_beta) continue;
      GridFunction f = GridFunction::indicator(n, c.lo, c.hi);
      double best = std::numeric_limits<double>::infinity();
      for (int m = 1; m <= n_max; ++m) {
        std::vector<double> mids = F.apply_midpoints(f);
        GridFunction g = F.apply(f);
        g *= inv_gamma;
        double sup = *std::max_element(g.values().begin(), g.values().end());
        sup = std::max(sup, inv_gamma * *std::max_element(mids.begin(), mids.end()));
        best = std::min(best, sup);
        double change = 0.0;
        for (std::size_t j = 0; j < g.values().size(); ++j) change = std::max(change, std::abs(g[j] - f[j]));
        f = std::move(g);
        // Once the iterates have settled the sup cannot drop any further.
        if (change <= 1e-10 * best) break;
      }
      vals.push_back(best);
    }
    if (vals.empty()) {
      res.warnings.push_back("no cylinder of depth " + std::to_string(r) + " avoids beta; probe truncated");
      break;
    }
    res.cylinder_counts.push_back(static_cast<int>(vals.size()));
    res.m_hat.push_back(*std::max_element(vals.begin(), vals.end()));
    res.per_cylinder.push_back(std::move(vals));
  }
  res.strictly_decreasing = !res.m_hat.empty();
  for (std::size_t i = 1; i < res.m_hat.size(); ++i)
    if (!(res.m_hat[i] < res.m_hat[i - 1])) res.strictly_decreasing = false;
  return res;
}

std::vector<double> max_cylinder_mass(const PiecewiseMap& T, double beta, const std::vector<double>& w, int r_max) {
  std::vector<double> out;
  for (int r = 1; r <= r_max; ++r) {
    double best = 0.0;
    for (const Cylinder& c : refine_partition(T, r, beta))
      if (!c.contains_beta) best = std::max(best, mass_on(w, c.lo, c.hi));
    out.push_back(best);
  }
  return out;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (my + f.slope * (x[i] - mx));
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

ParabolicScaling parabolic_scaling(const PiecewiseMap& T, int n_star, int r_max) {
  ParabolicScaling p;
  p.w.push_back(0.0);
  for (int r = 0; r <= r_max; ++r) {
    double next = T.inverse_branch(n_star, p.w.back());
    if (!(next > p.w.back())) {
      p.truncated = true;
      break;
    }
    p.w.push_back(next);
  }
  p.strictly_increasing = !p.truncated;
  const Branch& br = T.branch(n_star);
  double prod = 1.0;
  for (int r = 1; r + 1 < static_cast<int>(p.w.size()); ++r) {
    prod *= br.deriv(p.w[static_cast<std::size_t>(r) + 1], Side::right);
    p.D.push_back(prod);
  }
  const int r_hi = static_cast<int>(p.D.size());
  const int r_lo = std::max(1, r_hi / 2);
  if (r_hi - r_lo >= 2) {
    std::vector<double> lr, r_lin, ld;
    for (int r = r_lo; r <= r_hi; ++r) {
      lr.push_back(std::log(static_cast<double>(r)));
      r_lin.push_back(static_cast<double>(r));
      ld.push_back(std::log(p.D[static_cast<std::size_t>(r) - 1]));
    }
    LineFit loglog = fit_line(lr, ld), semilog = fit_line(r_lin, ld);
    p.theta_hat = loglog.slope;
    p.polynomial = loglog.rms < semilog.rms;
  }
  return p;
}

namespace {

StepFunction average_over_cylinders(const std::vector<Cylinder>& cyls, const std::vector<double>& w,
                                    const std::function<double(double, double)>& integral,
                                    std::vector<std::string>* warnings) {
  StepFunction e;
  for (const Cylinder& c : cyls) {
    e.edges.push_back(c.lo);
    double m = mass_on(w, c.lo, c.hi);
    if (m > 0.0) {
      e.values.push_back(integral(c.lo, c.hi) / m);
    } else {
      e.values.push_back(0.0);
      if (warnings) warnings->push_back("cylinder at " + std::to_string(c.lo) + " has no mass");
    }
  }
  e.edges.push_back(1.0);
  return e;
}

}  // namespace

StepFunction conditional_expectation(const GridFunction& f, int r, const std::vector<double>& w, const PiecewiseMap& T,
                                     std::vector<std::string>* warnings) {
  return average_over_cylinders(
      refine_partition(T, r), w, [&](double a, double b) { return integrate_on(f, w, a, b); }, warnings);
}

StepFunction conditional_expectation(const StepFunction& f, int r, const std::vector<double>& w, const PiecewiseMap& T,
                                     std::vector<std::string>* warnings) {
  auto integral = [&](double a, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      double lo = std::max(a, f.edges[i]), hi = std::min(b, f.edges[i + 1]);
      if (hi > lo) acc += f.values[i] * mass_on(w, lo, hi);
    }
    return acc;
  };
  return average_over_cylinders(refine_partition(T, r), w, integral, warnings);
}

Lemma46Result lemma46_check(const GridFunction& f, double c, int r, const std::vector<double>& m_hat,
                            const std::vector<double>& w, const PiecewiseMap& T, int n_star) {
  Lemma46Result res;
  if (r < 1 || r > static_cast<int>(m_hat.size())) throw std::invalid_argument("no M_r available for this depth");
  StepFunction e = conditional_expectation(f, r, w, T);
  res.lhs = l1_distance(f, e, w);
  double beta_mass = 0.0;
  for (const Cylinder& cyl : refine_partition(T, r))
    if (std::all_of(cyl.word.begin(), cyl.word.end(), [&](int d) { return d == n_star; }))
      beta_mass = mass_on(w, cyl.lo, cyl.hi);
  res.rhs = c * (m_hat[static_cast<std::size_t>(r) - 1] + beta_mass);
  res.pass = res.lhs <= res.rhs * (1.0 + 1e-6) + 1e-8;
  return res;
}

}  // namespace pmaps
