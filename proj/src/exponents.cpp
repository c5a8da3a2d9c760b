#include "besovlab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "besovlab/ball_index.hpp"
#include "besovlab/capacity.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"
#include "besovlab/projection.hpp"

namespace besovlab {

namespace {

std::vector<double> restricted(const SpacePtr& s, const std::string& label,
                               const std::function<double(const double*)>& value) {
  std::vector<double> v(s->size(), 0.0);
  if (label.empty()) {
    for (std::size_t i = 0; i < s->size(); ++i) v[i] = value(s->point(i));
  } else {
    for (std::size_t i : s->points_with_label(label)) v[i] = value(s->point(i));
  }
  return v;
}

void check_center(const SpacePtr& s, const std::vector<double>& c) {
  if (c.size() != s->dim()) throw ArgumentError("center dimension does not match the space");
}

}  // namespace

FunctionGenerator constant_generator(double c) {
  return {"constant", [c](const SpacePtr& s) { return constant_function(s, c); }};
}

FunctionGenerator label_indicator(const std::string& label) {
  return {"indicator_" + label, [label](const SpacePtr& s) {
            auto set = s->points_with_label(label);
            if (set.empty()) throw ArgumentError("space has no points labelled " + label);
            return indicator(s, set);
          }};
}

FunctionGenerator coordinate_function(std::size_t axis, const std::string& label) {
  return {"x" + std::to_string(axis) + (label.empty() ? "" : "_" + label), [axis, label](const SpacePtr& s) {
            if (axis >= s->dim()) throw ArgumentError("axis out of range");
            return FunctionOnSpace(s, restricted(s, label, [axis](const double* q) { return q[axis]; }));
          }};
}

FunctionGenerator cone_function(std::vector<double> center, double radius, const std::string& label) {
  if (!(radius > 0)) throw ArgumentError("cone radius must be positive");
  return {"cone" + (label.empty() ? "" : "_" + label), [center, radius, label](const SpacePtr& s) {
            check_center(s, center);
            return FunctionOnSpace(s, restricted(s, label, [&](const double* q) {
                                     return std::max(0.0, 1.0 - euclid(q, center.data(), center.size()) / radius);
                                   }));
          }};
}

FunctionGenerator ball_indicator(std::vector<double> center, double radius) {
  if (!(radius > 0)) throw ArgumentError("ball radius must be positive");
  return {"ball", [center, radius](const SpacePtr& s) {
            check_center(s, center);
            return FunctionOnSpace(s, restricted(s, "", [&](const double* q) {
                                     return euclid(q, center.data(), center.size()) < radius ? 1.0 : 0.0;
                                   }));
          }};
}

FunctionGenerator mollified_ball(std::vector<double> center, double radius, double width) {
  if (!(radius > 0) || !(width > 0) || width >= 2 * radius) throw ArgumentError("invalid mollified ball");
  return {"mollified_ball", [center, radius, width](const SpacePtr& s) {
            check_center(s, center);
            return FunctionOnSpace(s, restricted(s, "", [&](const double* q) {
                                     double r = euclid(q, center.data(), center.size());
                                     double t = (radius + 0.5 * width - r) / width;
                                     return std::clamp(t, 0.0, 1.0);
                                   }));
          }};
}

FunctionGenerator harmonic_function(const std::string& label, double p) {
  return {"harmonic" + (label.empty() ? "" : "_" + label), [label, p](const SpacePtr& s) {
            std::vector<std::size_t> pts;
            if (label.empty()) {
              pts.resize(s->size());
              for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = i;
            } else {
              pts = s->points_with_label(label);
            }
            if (pts.size() < 2) throw ArgumentError("harmonic function needs at least two atoms");
            std::vector<std::ptrdiff_t> local(s->size(), -1);
            for (std::size_t k = 0; k < pts.size(); ++k) local[pts[k]] = static_cast<std::ptrdiff_t>(k);
            GraphApprox g;
            g.family = "atoms";
            g.dim = s->dim();
            for (std::size_t i : pts) g.coords.insert(g.coords.end(), s->point(i), s->point(i) + s->dim());
            const double r = 1.2 * s->min_distance();
            for (std::size_t k = 0; k < pts.size(); ++k)
              for (std::size_t j : s->index().ball(pts[k], r)) {
                auto lj = local[j];
                if (lj > static_cast<std::ptrdiff_t>(k))
                  g.edges.push_back({std::uint32_t(k), std::uint32_t(lj)});
              }
            std::vector<double> ref;
            if (s->glue()) ref = s->glue()->point;
            else if (s->anchors().size() >= s->dim())
              ref.assign(s->anchors().begin(), s->anchors().begin() + s->dim());
            else ref.assign(s->point(pts[0]), s->point(pts[0]) + s->dim());
            std::size_t a = 0, b = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < pts.size(); ++k) {
              double d = euclid(s->point(pts[k]), ref.data(), s->dim());
              if (d < best) {
                best = d;
                a = k;
              }
            }
            best = -1;
            for (std::size_t k = 0; k < pts.size(); ++k) {
              double d = s->distance(pts[a], pts[k]);
              if (d > best) {
                best = d;
                b = k;
              }
            }
            g.boundary_a = {a};
            g.boundary_b = {b};
            auto res = p_capacity(g, p);
            std::vector<double> v(s->size(), 0.0);
            for (std::size_t k = 0; k < pts.size(); ++k) v[pts[k]] = res.minimizer[k];
            return FunctionOnSpace(s, std::move(v));
          }};
}

std::vector<double> level_spacings(const SpaceFamily& family) {
  std::vector<double> h;
  for (const auto& s : family.spaces) h.push_back(s->min_distance());
  return h;
}

namespace {
constexpr double kFlatIncrement = 0.01;
}  // namespace

GrowthSlope level_growth_slope(const std::vector<double>& e, const std::vector<double>& h) {
  if (e.size() < 2 || e.size() != h.size()) throw ResolutionError("growth slope needs at least 2 levels");
  GrowthSlope gs;
  const std::size_t L = e.size() - 1;
  if (*std::max_element(e.begin(), e.end()) == 0) {
    gs.zero_energy = true;
    return gs;
  }
  const double lh = std::log(h[L - 1] / h[L]);
  if (!(lh > 0)) throw ArgumentError("level spacings must decrease");
  if (e[L - 1] > 0 && e[L] > 0) gs.plain_slope = std::log(e[L] / e[L - 1]) / lh;
  else gs.plain_slope = e[L] > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  gs.slope = gs.plain_slope;
  if (e.size() >= 3) {
    double d1 = e[L - 1] - e[L - 2];
    double d2 = e[L] - e[L - 1];
    if (d2 > 0 && d2 <= kFlatIncrement * e[L]) {
      // last increment below 1% of the energy: plain slope
    } else if (d2 > 0 && d1 > 0) {
      gs.slope = std::log(d2 / d1) / lh;
      gs.increment_based = true;
    } else if (d2 <= 0) {
      gs.slope = std::min(gs.plain_slope, 0.0);
      gs.increment_based = true;
    }
  }
  return gs;
}

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ArgumentError("empty theta grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0)) throw ArgumentError("theta values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ArgumentError("theta grid must be ascending");
  }
}

}  // namespace

ThetaEstimate theta_p_estimate(const SpaceFamily& family, double p,
                               const std::vector<FunctionGenerator>& candidates,
                               const std::vector<double>& grid, const ThetaOptions& opt) {
  if (family.spaces.size() < 3) throw ResolutionError("theta_p estimate needs at least 3 levels");
  if (candidates.empty()) throw ArgumentError("no candidate functions");
  check_grid(grid);
  const auto h = level_spacings(family);
  const std::size_t nl = family.spaces.size(), nc = candidates.size(), nt = grid.size();
  // energy[level][candidate][theta]
  std::vector<std::vector<std::vector<double>>> energy(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    std::vector<std::vector<double>> values;
    for (const auto& c : candidates) values.push_back(c.make(family.spaces[l]).values());
    energy[l] = besov_pp_batch(*family.spaces[l], values, p, grid);
  }
  ThetaEstimate est;
  est.threshold = opt.slope_threshold;
  est.slope_threshold = opt.slope_threshold;
  est.theta_grid = grid;
  for (std::size_t t = 0; t < nt; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      ThetaEvidence ev;
      ev.theta = grid[t];
      ev.function = candidates[c].name;
      for (std::size_t l = 0; l < nl; ++l) ev.energies.push_back(energy[l][c][t]);
      ev.growth = level_growth_slope(ev.energies, h);
      ev.pass = !ev.growth.zero_energy && ev.growth.slope <= opt.slope_threshold;
      if (!ev.growth.zero_energy) best = std::min(best, ev.growth.slope);
      est.evidence.push_back(std::move(ev));
    }
    est.statistic.push_back(best);
    if (best <= opt.slope_threshold) est.value = grid[t];
  }
  return est;
}

ThetaEstimate theta_p_star_estimate(const SpaceFamily& family, double p,
                                    const std::vector<FunctionGenerator>& targets,
                                    const std::vector<double>& grid,
                                    const std::vector<double>& kappa_grid, const ThetaOptions& opt) {
  if (family.spaces.size() < 3) throw ResolutionError("theta_p* estimate needs at least 3 levels");
  if (targets.empty()) throw ArgumentError("no target functions");
  check_grid(grid);
  for (std::size_t i = 0; i < kappa_grid.size(); ++i)
    if (!(kappa_grid[i] > 0) || (i > 0 && !(kappa_grid[i] > kappa_grid[i - 1])))
      throw ArgumentError("kappa grid must be positive and ascending");
  const auto h = level_spacings(family);
  const std::size_t nl = family.spaces.size();
  const std::size_t L = nl - 1;

  std::vector<PairKernel> kernels;
  for (const auto& s : family.spaces) kernels.emplace_back(s, opt.jobs);
  std::vector<std::vector<FunctionOnSpace>> f(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k)
    for (const auto& s : family.spaces) f[k].push_back(targets[k].make(s));

  ThetaEstimate est;
  est.threshold = opt.density_threshold;
  est.slope_threshold = opt.slope_threshold;
  est.theta_grid = grid;
  for (double theta : grid) {
    std::vector<std::vector<float>> S;
    for (const auto& K : kernels) S.push_back(K.weights(p, theta));
    double D = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      ThetaEvidence ev;
      ev.theta = theta;
      ev.function = targets[k].name;
      for (std::size_t l = 0; l < nl; ++l) ev.energies.push_back(kernels[l].energy(S[l], f[k][l].values(), p));
      ev.growth = level_growth_slope(ev.energies, h);
      ev.pass = ev.growth.zero_energy || ev.growth.slope <= opt.slope_threshold;
      double Df = std::numeric_limits<double>::infinity();
      if (ev.pass) Df = 0;
      est.evidence.push_back(ev);
      if (Df == 0) continue;

      const FunctionOnSpace& fl = f[k][L];
      const Space& sl = *family.spaces[L];
      CompensatedSum mean;
      for (std::size_t i = 0; i < sl.size(); ++i) mean.add(sl.weight(i) * fl[i]);
      double mu = mean.value() / sl.total_mass();
      CompensatedSum spread;
      for (std::size_t i = 0; i < sl.size(); ++i) spread.add(sl.weight(i) * pow_p(std::abs(fl[i] - mu), p));
      const double scale = spread.value() / ev.energies[L];

      for (double kappa : kappa_grid) {
        const double eps = kappa * scale;
        ThetaEvidence pe;
        pe.theta = theta;
        pe.function = targets[k].name;
        pe.kappa = kappa;
        auto fine = besov_projection(kernels[L], S[L], fl, p, eps);
        pe.error = relative_lp_error(fine.g, fl, p);
        if (pe.error > opt.density_threshold) {
          // The error grows with the penalty, so larger kappa cannot help.
          pe.energies.assign(nl, std::numeric_limits<double>::quiet_NaN());
          pe.energies[L] = fine.energy;
          est.evidence.push_back(pe);
          Df = std::min(Df, pe.error);
          break;
        }
        pe.energies.resize(nl);
        pe.energies[L] = fine.energy;
        for (std::size_t l = 0; l < L; ++l)
          pe.energies[l] = besov_projection(kernels[l], S[l], f[k][l], p, eps).energy;
        pe.growth = level_growth_slope(pe.energies, h);
        pe.pass = pe.growth.slope <= opt.slope_threshold;
        est.evidence.push_back(pe);
        if (pe.pass) {
          Df = pe.error;
          break;
        }
      }
      D = std::max(D, Df);
    }
    est.statistic.push_back(D);
    if (D > opt.density_threshold) break;
    est.value = theta;
  }
  return est;
}

}  // namespace besovlab
