#include "besovlab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"

namespace besovlab {

namespace {

inline std::size_t row_offset(std::size_t x, std::size_t n) { return x * n - x * (x + 1) / 2; }

// Smoothed |t|^p: (t^2 + delta^2)^{p/2}, with first and second derivatives.
struct Penalty {
  double p;
  double delta2;
  // Quadratic majorizer curvature instead of the Hessian (p < 2).
  bool majorize = false;

  double value(double t) const {
    if (delta2 == 0) return pow_p(std::abs(t), p);
    return std::pow(t * t + delta2, 0.5 * p);
  }
  double d1(double t) const {
    if (delta2 == 0) return t == 0 ? 0.0 : p * std::pow(std::abs(t), p - 1) * (t > 0 ? 1 : -1);
    return p * t * std::pow(t * t + delta2, 0.5 * p - 1);
  }
  double d2(double t) const {
    if (delta2 == 0) return p == 2 ? 2.0 : p * (p - 1) * std::pow(std::abs(t), p - 2);
    double s = t * t + delta2;
    double newton = p * std::pow(s, 0.5 * p - 2) * ((p - 1) * t * t + delta2);
    return majorize ? std::max(newton, p * std::pow(s, 0.5 * p - 1)) : newton;
  }
};

}  // namespace

PairKernel::PairKernel(SpacePtr space, unsigned jobs) : space_(std::move(space)) {
  if (!space_) throw ArgumentError("no space");
  const Space& s = *space_;
  n_ = s.size();
  if (n_ > kMaxPoints) throw ResourceError("pair kernel", n_, kMaxPoints);
  const std::size_t pairs = n_ * (n_ - 1) / 2;
  // Each pair receives one term from the row of its lower index and one from
  // the row of its higher index; separate arrays keep the rows independent.
  mass_factor_.assign(pairs, 0.0f);
  log_distance_.assign(pairs, 0.0f);
  std::vector<float> upper(pairs, 0.0f);
  const auto& w = s.weights();
  parallel_chunks(n_, 16, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<std::pair<double, std::uint32_t>> row(n_);
    for (std::size_t x = b; x < e; ++x) {
      for (std::size_t y = 0; y < n_; ++y) row[y] = {s.distance(x, y), static_cast<std::uint32_t>(y)};
      std::sort(row.begin(), row.end());
      double mass_before = 0;
      std::size_t i = 0;
      while (i < n_) {
        const double d = row[i].first;
        std::size_t j = i;
        while (j < n_ && row[j].first == d) ++j;
        if (d > 0) {
          for (std::size_t k = i; k < j; ++k) {
            std::size_t y = row[k].second;
            double term = w[x] * w[y] / mass_before;
            if (y > x) {
              std::size_t idx = row_offset(x, n_) + (y - x - 1);
              mass_factor_[idx] = static_cast<float>(term);
              log_distance_[idx] = static_cast<float>(std::log(d));
            } else {
              upper[row_offset(y, n_) + (x - y - 1)] = static_cast<float>(term);
            }
          }
        }
        for (std::size_t k = i; k < j; ++k) mass_before += w[row[k].second];
        i = j;
      }
    }
  }, jobs);
  for (std::size_t k = 0; k < pairs; ++k)
    mass_factor_[k] = static_cast<float>(double(mass_factor_[k]) + double(upper[k]));
}

std::vector<float> PairKernel::weights(double p, double theta) const {
  if (!(p > 1) || !(theta > 0)) throw ArgumentError("invalid p or theta");
  std::vector<float> s(mass_factor_.size());
  const double a = -theta * p;
  parallel_chunks(s.size(), 1 << 16, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k)
      s[k] = mass_factor_[k] == 0 ? 0.0f
                                  : static_cast<float>(mass_factor_[k] * std::exp(a * log_distance_[k]));
  });
  return s;
}

double PairKernel::energy(const std::vector<float>& s, const std::vector<double>& u, double p) const {
  if (s.size() != mass_factor_.size() || u.size() != n_) throw ArgumentError("kernel size mismatch");
  const std::size_t chunks = (n_ + 63) / 64;
  std::vector<CompensatedSum> parts(chunks);
  parallel_chunks(n_, 64, [&](std::size_t c, std::size_t b, std::size_t e) {
    CompensatedSum acc;
    for (std::size_t x = b; x < e; ++x) {
      const float* sx = s.data() + row_offset(x, n_);
      double row = 0;
      for (std::size_t y = x + 1; y < n_; ++y) {
        double d = std::abs(u[x] - u[y]);
        if (d != 0) row += sx[y - x - 1] * pow_p(d, p);
      }
      acc.add(row);
    }
    parts[c] = acc;
  });
  return tree_reduce(parts);
}

double relative_lp_error(const FunctionOnSpace& g, const FunctionOnSpace& f, double p) {
  require_same_space(g, f);
  const Space& s = f.space();
  CompensatedSum num, den;
  for (std::size_t i = 0; i < s.size(); ++i) {
    num.add(s.weight(i) * pow_p(std::abs(g[i] - f[i]), p));
    den.add(s.weight(i) * pow_p(std::abs(f[i]), p));
  }
  if (den.value() == 0) return num.value() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(num.value() / den.value(), 1.0 / p);
}

ProjectionResult besov_projection(const PairKernel& kernel, const std::vector<float>& s,
                                  const FunctionOnSpace& f, double p, double eps,
                                  const ProjectionOptions& opt) {
  if (!(eps > 0) || !std::isfinite(eps)) throw ArgumentError("penalty must be positive");
  if (!(p > 1)) throw ArgumentError("p must lie in (1, inf)");
  if (!f.bound() || f.space().id() != kernel.space()->id())
    throw BindingError("function is not bound to the kernel's space");
  const std::size_t n = kernel.size();
  const auto& w = f.space().weights();
  const auto& fv = f.values();

  auto finish = [&](std::vector<double> g, int iters) {
    ProjectionResult r;
    CompensatedSum fid;
    for (std::size_t x = 0; x < n; ++x) fid.add(w[x] * pow_p(std::abs(g[x] - fv[x]), p));
    r.fidelity = fid.value();
    r.energy = kernel.energy(s, g, p);
    r.objective = r.fidelity + eps * r.energy;
    r.iterations = iters;
    r.g = FunctionOnSpace(f.space_ptr(), std::move(g));
    return r;
  };

  auto [lo, hi] = std::minmax_element(fv.begin(), fv.end());
  const double scale = *hi - *lo;
  std::vector<double> g = fv;
  if (scale == 0) return finish(g, 0);

  std::vector<double> stages;
  if (p == 2) stages = {0.0};
  else
    for (double k : {1e-2, 1e-3, 1e-4, 1e-5}) stages.push_back(k * scale);

  std::vector<float> h(s.size());
  std::vector<double> grad(n), df(n), diag(n), step(n), r(n), z(n), q(n), dir(n), trial(n);

  auto objective = [&](const std::vector<double>& u, const Penalty& pen) {
    CompensatedSum fid;
    for (std::size_t x = 0; x < n; ++x) fid.add(w[x] * pen.value(u[x] - fv[x]));
    CompensatedSum en;
    for (std::size_t x = 0; x < n; ++x) {
      const float* sx = s.data() + row_offset(x, n);
      double row = 0;
      for (std::size_t y = x + 1; y < n; ++y) row += sx[y - x - 1] * pen.value(u[x] - u[y]);
      en.add(row);
    }
    return fid.value() + eps * en.value();
  };
  auto hess_vec = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t x = 0; x < n; ++x) out[x] = df[x] * v[x];
    std::size_t k = 0;
    for (std::size_t x = 0; x < n; ++x) {
      double acc = 0;
      const double vx = v[x];
      for (std::size_t y = x + 1; y < n; ++y, ++k) {
        double t = h[k] * (vx - v[y]);
        acc += t;
        out[y] -= t;
      }
      out[x] += acc;
    }
  };

  int iters = 0;
  for (double delta : stages) {
    Penalty pen{p, delta * delta};
    double J = objective(g, pen);
    for (;;) {
      if (iters >= opt.max_newton)
        throw ConvergenceError("Besov projection exceeded " + std::to_string(opt.max_newton) +
                                   " Newton steps",
                               g, J);
      ++iters;
      for (std::size_t x = 0; x < n; ++x) {
        double rr = g[x] - fv[x];
        grad[x] = w[x] * pen.d1(rr);
        df[x] = w[x] * pen.d2(rr);
        diag[x] = df[x];
      }
      std::size_t k = 0;
      for (std::size_t x = 0; x < n; ++x) {
        double gx = 0, dx = 0;
        for (std::size_t y = x + 1; y < n; ++y, ++k) {
          double d = g[x] - g[y];
          double sk = eps * s[k];
          double g1 = sk * pen.d1(d);
          float hk = static_cast<float>(sk * pen.d2(d));
          h[k] = hk;
          gx += g1;
          grad[y] -= g1;
          dx += hk;
          diag[y] += hk;
        }
        grad[x] += gx;
        diag[x] += dx;
      }
      // Preconditioned CG on H step = -grad.
      double gnorm = 0;
      for (double v : grad) gnorm += v * v;
      gnorm = std::sqrt(gnorm);
      if (gnorm == 0) break;
      std::fill(step.begin(), step.end(), 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        r[x] = -grad[x];
        z[x] = r[x] / diag[x];
        dir[x] = z[x];
      }
      double rz = 0;
      for (std::size_t x = 0; x < n; ++x) rz += r[x] * z[x];
      for (int it = 0; it < opt.max_cg; ++it) {
        hess_vec(dir, q);
        double dq = 0;
        for (std::size_t x = 0; x < n; ++x) dq += dir[x] * q[x];
        if (!(dq > 0)) break;
        double alpha = rz / dq;
        double rn = 0;
        for (std::size_t x = 0; x < n; ++x) {
          step[x] += alpha * dir[x];
          r[x] -= alpha * q[x];
          rn += r[x] * r[x];
        }
        if (std::sqrt(rn) <= 1e-6 * gnorm) break;
        double rz_new = 0;
        for (std::size_t x = 0; x < n; ++x) {
          z[x] = r[x] / diag[x];
          rz_new += r[x] * z[x];
        }
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t x = 0; x < n; ++x) dir[x] = z[x] + beta * dir[x];
      }
      double slope = 0;
      for (std::size_t x = 0; x < n; ++x) slope += grad[x] * step[x];
      if (!(slope < 0)) break;
      double t = 1, Jnew = J;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        for (std::size_t x = 0; x < n; ++x) trial[x] = g[x] + t * step[x];
        Jnew = objective(trial, pen);
        if (Jnew <= J + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      g.swap(trial);
      double decrease = J - Jnew;
      J = Jnew;
      // Newton steps for p < 2 can overshoot to the mirrored residual with little
      // decrease; the next step then uses the majorizer.
      pen.majorize = decrease < 0.125 * -slope;
      if (decrease <= opt.tol * J || -slope <= opt.tol * J) break;
    }
  }
  return finish(std::move(g), iters);
}

ProjectionResult besov_projection(const FunctionOnSpace& f, double p, double theta, double eps,
                                  const ProjectionOptions& options) {
  if (!f.bound()) throw BindingError("function is not bound to a space");
  PairKernel kernel(f.space_ptr());
  return besov_projection(kernel, kernel.weights(p, theta), f, p, eps, options);
}

}  // namespace besovlab
