#include "besovlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "besovlab/ball_index.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"

namespace besovlab {

namespace {

void check_exponents(double p, double theta) {
  if (!(p > 1) || !std::isfinite(p)) throw ArgumentError("p must lie in (1, inf)");
  if (!(theta > 0) || !std::isfinite(theta)) throw ArgumentError("theta must be positive");
}

void check_radii(const Space& space, const std::vector<double>& radii, std::size_t min_count) {
  if (radii.size() < min_count)
    throw ArgumentError("radius grid needs at least " + std::to_string(min_count) + " points");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0) || !std::isfinite(radii[i])) throw ArgumentError("radii must be positive");
    if (radii[i] > space.diameter() * (1 + 1e-12))
      throw ArgumentError("radius exceeds the diameter");
    if (i > 0 && !(radii[i] < radii[i - 1]))
      throw ArgumentError("radii must be strictly decreasing");
  }
}

using SortedRow = std::vector<std::pair<double, std::uint32_t>>;

void sorted_row(const Space& space, std::size_t x, SortedRow& row) {
  const std::size_t n = space.size();
  row.resize(n);
  for (std::size_t y = 0; y < n; ++y) row[y] = {space.distance(x, y), static_cast<std::uint32_t>(y)};
  std::sort(row.begin(), row.end());
}

bool uniform_grid(const std::vector<double>& t) {
  if (t.size() < 3) return false;
  double step = t[1] - t[0];
  for (std::size_t i = 2; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - step) > 1e-12 * std::max(1.0, std::abs(step))) return false;
  return true;
}

}  // namespace

FunctionOnSpace::FunctionOnSpace(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw BindingError("function is not bound to a space");
  if (values_.size() != space_->size())
    throw BindingError("function has " + std::to_string(values_.size()) + " values for a space of " +
                       std::to_string(space_->size()) + " points");
  for (double v : values_)
    if (!std::isfinite(v)) throw ArgumentError("function values must be finite");
}

const Space& FunctionOnSpace::space() const {
  if (!space_) throw BindingError("function is not bound to a space");
  return *space_;
}

FunctionOnSpace constant_function(const SpacePtr& space, double c) {
  if (!space) throw BindingError("no space");
  return FunctionOnSpace(space, std::vector<double>(space->size(), c));
}

FunctionOnSpace indicator(const SpacePtr& space, const std::vector<std::size_t>& set) {
  if (!space) throw BindingError("no space");
  std::vector<double> v(space->size(), 0.0);
  for (std::size_t i : set) {
    if (i >= v.size()) throw ArgumentError("set index out of range");
    v[i] = 1.0;
  }
  return FunctionOnSpace(space, std::move(v));
}

void require_same_space(const FunctionOnSpace& u, const FunctionOnSpace& v) {
  if (!u.bound() || !v.bound()) throw BindingError("function is not bound to a space");
  if (u.space().id() != v.space().id()) throw BindingError("functions live on different spaces");
}

FunctionOnSpace scaled(const FunctionOnSpace& u, double c) {
  std::vector<double> v = u.values();
  for (double& a : v) a *= c;
  return FunctionOnSpace(u.space_ptr(), std::move(v));
}

FunctionOnSpace sum(const FunctionOnSpace& u, const FunctionOnSpace& v) {
  require_same_space(u, v);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] + v[i];
  return FunctionOnSpace(u.space_ptr(), std::move(out));
}

const char* to_string(TailClass c) {
  switch (c) {
    case TailClass::vanishing: return "vanishing";
    case TailClass::positive: return "positive";
    default: return "indeterminate";
  }
}

const char* to_string(RatioFlag f) {
  switch (f) {
    case RatioFlag::finite: return "finite";
    case RatioFlag::infinite: return "infinite";
    default: return "degenerate";
  }
}

std::vector<std::vector<double>> besov_pp_batch(const Space& space,
                                                const std::vector<std::vector<double>>& functions,
                                                double p, const std::vector<double>& thetas) {
  if (thetas.empty()) throw ArgumentError("no theta values");
  for (double t : thetas) check_exponents(p, t);
  const std::size_t n = space.size();
  const std::size_t nf = functions.size();
  const std::size_t nt = thetas.size();
  for (const auto& f : functions)
    if (f.size() != n) throw BindingError("function length does not match the space");
  const bool recur = uniform_grid(thetas);
  const double t0 = thetas.front();
  const double dt = nt > 1 ? thetas[1] - thetas[0] : 0.0;

  // Functions that are constant contribute nothing.
  std::vector<std::size_t> active;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& v = functions[f];
    if (std::any_of(v.begin(), v.end(), [&](double a) { return a != v[0]; })) active.push_back(f);
  }
  std::vector<std::vector<double>> result(nf, std::vector<double>(nt, 0.0));
  if (active.empty() || n < 2) return result;

  constexpr std::size_t kChunk = 16;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<CompensatedSum>> parts(chunks,
                                                 std::vector<CompensatedSum>(active.size() * nt));
  const auto& w = space.weights();
  parallel_chunks(n, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    SortedRow row;
    std::vector<long double> acc(active.size() * nt);
    std::vector<double> fac(nt), diffp(active.size());
    for (std::size_t x = b; x < e; ++x) {
      sorted_row(space, x, row);
      std::fill(acc.begin(), acc.end(), 0.0L);
      long double mass_before = 0.0L;
      std::size_t i = 0;
      while (i < n) {
        const double d = row[i].first;
        std::size_t j = i;
        while (j < n && row[j].first == d) ++j;
        if (d > 0) {
          const double mu = static_cast<double>(mass_before);
          const double lg = std::log(d);
          if (recur) {
            double f0 = std::exp(-t0 * p * lg) / mu;
            double step = std::exp(-dt * p * lg);
            for (std::size_t t = 0; t < nt; ++t) {
              fac[t] = f0;
              f0 *= step;
            }
          } else {
            for (std::size_t t = 0; t < nt; ++t) fac[t] = std::exp(-thetas[t] * p * lg) / mu;
          }
          for (std::size_t k = i; k < j; ++k) {
            const std::size_t y = row[k].second;
            bool any = false;
            for (std::size_t a = 0; a < active.size(); ++a) {
              const auto& u = functions[active[a]];
              double diff = std::abs(u[x] - u[y]);
              diffp[a] = diff == 0 ? 0.0 : pow_p(diff, p) * w[y];
              any |= diff != 0;
            }
            if (!any) continue;
            for (std::size_t a = 0; a < active.size(); ++a) {
              if (diffp[a] == 0) continue;
              long double* out = acc.data() + a * nt;
              for (std::size_t t = 0; t < nt; ++t) out[t] += diffp[a] * fac[t];
            }
          }
        }
        for (std::size_t k = i; k < j; ++k) mass_before += w[row[k].second];
        i = j;
      }
      for (std::size_t q = 0; q < acc.size(); ++q) {
        double v = w[x] * static_cast<double>(acc[q]);
        if (!std::isfinite(v)) {
          // Locate the offending pair for the message.
          std::size_t a = q / nt;
          const auto& u = functions[active[a]];
          for (std::size_t y = 0; y < n; ++y) {
            double d = space.distance(x, y);
            if (d <= 0) continue;
            double term = pow_p(std::abs(u[x] - u[y]), p) * w[x] * w[y] /
                          std::pow(d, thetas[q % nt] * p);
            if (!std::isfinite(term) || term > 1e300)
              throw OverflowError("non-finite Besov term at pair (" + std::to_string(x) + ", " +
                                  std::to_string(y) + ")");
          }
          throw OverflowError("non-finite Besov row sum at point " + std::to_string(x));
        }
        parts[c][q].add(v);
      }
    }
  });
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t t = 0; t < nt; ++t) {
      std::vector<CompensatedSum> col(chunks);
      for (std::size_t c = 0; c < chunks; ++c) col[c] = parts[c][a * nt + t];
      result[active[a]][t] = tree_reduce(col);
    }
  }
  return result;
}

double besov_pp_energy(const FunctionOnSpace& u, double p, double theta) {
  if (!u.bound()) throw BindingError("function is not bound to a space");
  check_exponents(p, theta);
  return besov_pp_batch(u.space(), {u.values()}, p, {theta})[0][0];
}

std::vector<double> radius_grid(double hi, double lo, std::size_t per_decade) {
  if (!(hi > 0) || !(lo > 0) || !(lo < hi)) throw ArgumentError("invalid radius range");
  double decades = std::log10(hi / lo);
  std::size_t n = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(decades * per_decade - 1e-9)) + 1);
  return log_spaced_desc(hi, lo, n);
}

std::vector<double> default_radii(const Space& space, std::size_t per_decade) {
  double lo = 2 * space.min_distance();
  double hi = space.diameter();
  if (!(lo < hi)) lo = hi / 8;
  return radius_grid(hi, lo, per_decade);
}

std::vector<double> dyadic_radii(const Space& space, double r_min) {
  std::vector<double> out;
  double r = space.diameter();
  while (r >= r_min * (1 - 1e-12)) {
    out.push_back(r);
    r *= 0.5;
  }
  return out;
}

std::vector<double> multiscale_unscaled(const FunctionOnSpace& u, double p,
                                        const std::vector<double>& radii) {
  if (!u.bound()) throw BindingError("function is not bound to a space");
  const Space& space = u.space();
  check_radii(space, radii, 1);
  const std::size_t n = space.size();
  const std::size_t nr = radii.size();
  const auto& w = space.weights();
  const auto& vals = u.values();
  std::vector<double> out(nr, 0.0);
  if (std::all_of(vals.begin(), vals.end(), [&](double a) { return a == vals[0]; })) return out;

  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const BallIndex& idx = space.index();
  if (idx.brute()) {
    std::vector<std::vector<CompensatedSum>> parts(chunks, std::vector<CompensatedSum>(nr));
    parallel_chunks(n, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
      SortedRow row;
      std::vector<double> mass_pref(n + 1), diff_pref(n + 1);
      for (std::size_t x = b; x < e; ++x) {
        sorted_row(space, x, row);
        long double m = 0, dsum = 0;
        mass_pref[0] = 0;
        diff_pref[0] = 0;
        for (std::size_t k = 0; k < n; ++k) {
          std::size_t y = row[k].second;
          m += w[y];
          double diff = std::abs(vals[x] - vals[y]);
          if (diff != 0) dsum += pow_p(diff, p) * w[y];
          mass_pref[k + 1] = static_cast<double>(m);
          diff_pref[k + 1] = static_cast<double>(dsum);
        }
        for (std::size_t r = 0; r < nr; ++r) {
          auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(radii[r], std::uint32_t{0}));
          std::size_t cnt = static_cast<std::size_t>(it - row.begin());
          if (diff_pref[cnt] != 0) parts[c][r].add(w[x] * diff_pref[cnt] / mass_pref[cnt]);
        }
      }
    });
    for (std::size_t r = 0; r < nr; ++r) {
      std::vector<CompensatedSum> col(chunks);
      for (std::size_t c = 0; c < chunks; ++c) col[c] = parts[c][r];
      out[r] = tree_reduce(col);
    }
    return out;
  }

  IndexedValues f = idx.prepare(vals);
  std::vector<double> nearest(n);
  parallel_chunks(n, 1024, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t x = b; x < e; ++x) nearest[x] = idx.nearest_different(x, f);
  });
  for (std::size_t r = 0; r < nr; ++r) {
    const double t = radii[r];
    std::vector<CompensatedSum> parts(chunks);
    parallel_chunks(n, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
      CompensatedSum s;
      for (std::size_t x = b; x < e; ++x) {
        if (!(nearest[x] < t)) continue;
        BallSums bs = idx.sums(x, t, f, p);
        if (bs.diff != 0) s.add(w[x] * bs.diff / bs.mass);
      }
      parts[c] = s;
    });
    out[r] = tree_reduce(parts);
  }
  return out;
}

std::vector<EnergyProfile> multiscale_energies(const FunctionOnSpace& u, double p,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& radii,
                                               const MultiscaleOptions& options) {
  if (!u.bound()) throw BindingError("function is not bound to a space");
  if (thetas.empty()) throw ArgumentError("no theta values");
  for (double t : thetas) check_exponents(p, t);
  const Space& space = u.space();
  check_radii(space, radii, 4);

  std::vector<double> dyadic;
  if (options.with_dyadic) dyadic = dyadic_radii(space, radii.back());
  std::vector<double> all = radii;
  all.insert(all.end(), dyadic.begin(), dyadic.end());
  std::sort(all.begin(), all.end(), std::greater<>());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> raw = multiscale_unscaled(u, p, all);
  auto lookup = [&](double r) {
    auto it = std::lower_bound(all.begin(), all.end(), r, std::greater<>());
    return raw[static_cast<std::size_t>(it - all.begin())];
  };

  std::vector<std::vector<double>> besov;
  if (options.with_besov && space.size() <= options.besov_limit)
    besov = besov_pp_batch(space, {u.values()}, p, thetas);

  std::vector<EnergyProfile> out;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    EnergyProfile prof;
    prof.p = p;
    prof.theta = thetas[k];
    prof.radii = radii;
    for (double r : radii) prof.values.push_back(lookup(r) / std::pow(r, thetas[k] * p));
    prof.dyadic_radii = dyadic;
    CompensatedSum ds;
    for (double r : dyadic) {
      double v = lookup(r) / std::pow(r, thetas[k] * p);
      prof.dyadic_values.push_back(v);
      ds.add(v);
    }
    prof.dyadic_sum = ds.value();
    if (!besov.empty()) prof.besov_pp = besov[0][k];
    out.push_back(std::move(prof));
  }
  return out;
}

EnergyProfile multiscale_energy(const FunctionOnSpace& u, double p, double theta,
                                const std::vector<double>& radii, const MultiscaleOptions& options) {
  return multiscale_energies(u, p, {theta}, radii, options).front();
}

double besov_pinfty_energy(const EnergyProfile& profile) {
  if (profile.values.empty()) throw ArgumentError("empty profile");
  return *std::max_element(profile.values.begin(), profile.values.end());
}

ScalingFit fit_power_law(const std::vector<double>& radii, const std::vector<double>& values,
                         double r_lo, double r_hi) {
  std::vector<double> lx, ly;
  ScalingFit fit;
  fit.r_lo = std::numeric_limits<double>::infinity();
  fit.r_hi = 0;
  for (std::size_t i = 0; i < radii.size() && i < values.size(); ++i) {
    double r = radii[i];
    if (r < r_lo * (1 - 1e-12) || r > r_hi * (1 + 1e-12) || !(values[i] > 0)) continue;
    lx.push_back(std::log(r));
    ly.push_back(std::log(values[i]));
    fit.r_lo = std::min(fit.r_lo, r);
    fit.r_hi = std::max(fit.r_hi, r);
  }
  if (lx.size() < 4) throw ResolutionError("power-law fit needs at least 4 positive grid points");
  LinearFit lf = least_squares(lx, ly);
  fit.alpha = lf.slope;
  fit.log_constant = lf.intercept;
  fit.r_squared = lf.r_squared;
  fit.count = lx.size();
  return fit;
}

TailClass classify_tail(double energy, const ScalingFit& fit, const TailThresholds& th) {
  if (energy == 0) return TailClass::vanishing;
  if (fit.count >= 4 && fit.alpha > 0 && fit.r_squared >= th.vanishing_r_squared)
    return TailClass::vanishing;
  if (fit.count >= 4 && std::abs(fit.alpha) <= th.positive_alpha && energy > 0)
    return TailClass::positive;
  return TailClass::indeterminate;
}

std::vector<std::size_t> tail_window(const std::vector<double>& radii, double tail_fraction) {
  if (!(tail_fraction > 0 && tail_fraction <= 1)) throw ArgumentError("tail_fraction must lie in (0, 1]");
  std::size_t n = radii.size();
  std::size_t k = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(tail_fraction * n)));
  k = std::min(k, n);
  std::vector<std::size_t> out;
  for (std::size_t i = n - k; i < n; ++i) out.push_back(i);
  return out;
}

KsTail ks_energy_tail(const EnergyProfile& profile, double tail_fraction, const TailThresholds& th) {
  const auto& r = profile.radii;
  if (r.size() < 8) throw ResolutionError("KS tail needs at least 8 radii");
  if (std::log10(r.front() / r.back()) < 2 - 1e-9)
    throw ResolutionError("KS tail needs radii spanning at least 2 decades");
  auto win = tail_window(r, tail_fraction);
  KsTail tail;
  std::vector<double> wr, wv;
  for (std::size_t i : win) {
    tail.energy = std::max(tail.energy, profile.values[i]);
    wr.push_back(r[i]);
    wv.push_back(profile.values[i]);
  }
  tail.fit.r_lo = wr.back();
  tail.fit.r_hi = wr.front();
  std::size_t positive = std::count_if(wv.begin(), wv.end(), [](double v) { return v > 0; });
  if (positive >= 4) tail.fit = fit_power_law(wr, wv, wr.back(), wr.front());
  tail.classification = classify_tail(tail.energy, tail.fit, th);
  return tail;
}

FunctionOnSpace normal_contraction(const FunctionOnSpace& u, double alpha, double beta) {
  if (alpha > 0) throw ArgumentError("normal contraction needs alpha <= 0");
  if (beta < 0) throw ArgumentError("normal contraction needs beta >= 0");
  std::vector<double> v = u.values();
  for (double& a : v) a = std::max(alpha, std::min(a, beta));
  return FunctionOnSpace(u.space_ptr(), std::move(v));
}

FunctionOnSpace product(const FunctionOnSpace& u, const FunctionOnSpace& v) {
  require_same_space(u, v);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] * v[i];
  return FunctionOnSpace(u.space_ptr(), std::move(out));
}

double iks_normalization_cube(int n) { return 2.0 * n; }
double iks_normalization_fractal(double d_f, double p, double theta) { return d_f + p * theta; }

namespace {

// Values of a component function at the component's points of the glued space.
std::vector<double> component_values(const FunctionOnSpace& u, const Space& glued,
                                     const std::vector<std::size_t>& comp) {
  if (!u.bound()) throw BindingError("function is not bound to a space");
  std::vector<double> out;
  if (u.space().id() == glued.id()) {
    for (std::size_t i : comp) out.push_back(u[i]);
  } else if (u.size() == comp.size()) {
    out = u.values();
  } else {
    throw BindingError("component function matches neither the glued space nor the component");
  }
  return out;
}

}  // namespace

IksProfile cross_coupling_iks(const FunctionOnSpace& u1, const FunctionOnSpace& u2,
                              const SpacePtr& glued, double p, double theta,
                              const std::vector<double>& radii, double normalization_exponent) {
  if (!glued) throw ArgumentError("no glued space");
  check_exponents(p, theta);
  const Space& s = *glued;
  if (!s.glue()) throw ArgumentError("space carries no glue metadata");
  auto e1 = s.points_with_label("E1");
  auto e2 = s.points_with_label("E2");
  if (e1.empty() || e2.empty()) throw ArgumentError("glued space lacks E1/E2 labels");
  check_radii(s, radii, 1);
  auto v1 = component_values(u1, s, e1);
  auto v2 = component_values(u2, s, e2);
  const double* o = s.glue()->point.data();

  struct Item {
    double d, v, w;
  };
  auto items = [&](const std::vector<std::size_t>& comp, const std::vector<double>& v) {
    std::vector<Item> out;
    for (std::size_t k = 0; k < comp.size(); ++k)
      out.push_back({euclid(s.point(comp[k]), o, s.dim()), v[k], s.weight(comp[k])});
    std::sort(out.begin(), out.end(), [](const Item& a, const Item& b) { return a.d < b.d; });
    return out;
  };
  auto a = items(e1, v1);
  auto b = items(e2, v2);

  IksProfile prof;
  prof.radii = radii;
  prof.normalization_exponent = normalization_exponent;
  for (double r : radii) {
    std::size_t na = std::lower_bound(a.begin(), a.end(), r, [](const Item& it, double x) { return it.d < x; }) - a.begin();
    std::size_t nb = std::lower_bound(b.begin(), b.end(), r, [](const Item& it, double x) { return it.d < x; }) - b.begin();
    CompensatedSum total;
    auto constant = [](const std::vector<Item>& xs, std::size_t n) {
      for (std::size_t i = 1; i < n; ++i)
        if (xs[i].v != xs[0].v) return false;
      return true;
    };
    if (na > 0 && nb > 0) {
      if (constant(b, nb) || constant(a, na)) {
        const auto& var = constant(b, nb) ? a : b;
        const auto& con = constant(b, nb) ? b : a;
        std::size_t nv = constant(b, nb) ? na : nb, nc = constant(b, nb) ? nb : na;
        CompensatedSum mass;
        for (std::size_t j = 0; j < nc; ++j) mass.add(con[j].w);
        CompensatedSum part;
        for (std::size_t i = 0; i < nv; ++i) {
          double diff = std::abs(var[i].v - con[0].v);
          if (diff != 0) part.add(pow_p(diff, p) * var[i].w);
        }
        total.add(part.value() * mass.value());
      } else if (p == 2.0) {
        CompensatedSum m0a, m1a, m2a, m0b, m1b, m2b;
        for (std::size_t i = 0; i < na; ++i) {
          m0a.add(a[i].w);
          m1a.add(a[i].w * a[i].v);
          m2a.add(a[i].w * a[i].v * a[i].v);
        }
        for (std::size_t j = 0; j < nb; ++j) {
          m0b.add(b[j].w);
          m1b.add(b[j].w * b[j].v);
          m2b.add(b[j].w * b[j].v * b[j].v);
        }
        double val = m2a.value() * m0b.value() - 2 * m1a.value() * m1b.value() + m0a.value() * m2b.value();
        total.add(std::max(0.0, val));
      } else {
        for (std::size_t i = 0; i < na; ++i) {
          long double row = 0;
          for (std::size_t j = 0; j < nb; ++j) {
            double diff = std::abs(a[i].v - b[j].v);
            if (diff != 0) row += pow_p(diff, p) * b[j].w;
          }
          total.add(a[i].w * static_cast<double>(row));
        }
      }
    }
    prof.values.push_back(total.value() / std::pow(r, normalization_exponent));
  }
  if (radii.size() >= 8) {
    auto win = tail_window(radii, 0.5);
    std::vector<double> wr, wv;
    double energy = 0;
    for (std::size_t i : win) {
      wr.push_back(radii[i]);
      wv.push_back(prof.values[i]);
      energy = std::max(energy, prof.values[i]);
    }
    if (std::count_if(wv.begin(), wv.end(), [](double v) { return v > 0; }) >= 4)
      prof.fit = fit_power_law(wr, wv, wr.back(), wr.front());
    prof.classification = classify_tail(energy, prof.fit.value_or(ScalingFit{}));
  }
  return prof;
}

FunctionOnSpace loglog_witness(const SpacePtr& glued) {
  if (!glued || !glued->glue()) throw ArgumentError("loglog witness needs a glued space");
  const Space& s = *glued;
  auto e1 = s.points_with_label("E1");
  std::vector<double> v(s.size(), 0.0);
  const double* o = s.glue()->point.data();
  for (std::size_t i : e1) {
    double r = euclid(s.point(i), o, s.dim());
    if (r > 0 && r < 1) v[i] = std::log(std::max(1.0, -std::log(r)));
  }
  return FunctionOnSpace(glued, std::move(v));
}

RatioResult wmax_ratio(const FunctionOnSpace& u, double p, double theta,
                       const std::vector<double>& radii) {
  MultiscaleOptions opt;
  opt.with_besov = false;
  EnergyProfile prof = multiscale_energy(u, p, theta, radii, opt);
  KsTail tail = ks_energy_tail(prof);
  RatioResult res;
  res.numerator = besov_pinfty_energy(prof);
  res.denominator = tail.energy;
  res.r_lo = tail.fit.r_lo;
  res.r_hi = tail.fit.r_hi;
  if (res.numerator == 0 && res.denominator == 0) {
    res.ratio = 1.0;
    res.flag = RatioFlag::degenerate;
  } else if (tail.classification == TailClass::vanishing || res.denominator == 0) {
    res.ratio = std::numeric_limits<double>::infinity();
    res.flag = RatioFlag::infinite;
  } else {
    res.ratio = res.numerator / res.denominator;
  }
  return res;
}

RatioResult sobolev_ratio(const FunctionOnSpace& u, double p, double theta,
                          const std::vector<double>& radii_in) {
  if (!u.bound()) throw BindingError("function is not bound to a space");
  const Space& s = u.space();
  std::vector<double> radii = radii_in.empty() ? default_radii(s) : radii_in;
  MultiscaleOptions opt;
  opt.with_besov = false;
  opt.with_dyadic = false;
  EnergyProfile prof = multiscale_energy(u, p, theta, radii, opt);
  CompensatedSum mean;
  for (std::size_t i = 0; i < s.size(); ++i) mean.add(s.weight(i) * u[i]);
  double ux = mean.value() / s.total_mass();
  CompensatedSum num;
  for (std::size_t i = 0; i < s.size(); ++i) num.add(s.weight(i) * pow_p(std::abs(u[i] - ux), p));
  auto win = tail_window(radii, 0.5);
  double den = std::numeric_limits<double>::infinity();
  for (std::size_t i : win) den = std::min(den, prof.values[i]);
  RatioResult res;
  res.numerator = num.value();
  res.denominator = den;
  res.r_lo = radii[win.back()];
  res.r_hi = radii[win.front()];
  if (res.numerator == 0 && den == 0) {
    res.ratio = 1.0;
    res.flag = RatioFlag::degenerate;
  } else if (den == 0) {
    res.ratio = std::numeric_limits<double>::infinity();
    res.flag = RatioFlag::infinite;
  } else {
    res.ratio = res.numerator / den;
  }
  return res;
}

}  // namespace besovlab
