#include "besovlab/decompose.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "besovlab/ball_index.hpp"
#include "besovlab/errors.hpp"
#include "besovlab/numeric.hpp"
#include "besovlab/projection.hpp"

namespace besovlab {

double set_mass(const Space& space, const IndexSet& set) {
  CompensatedSum m;
  for (std::size_t i : set) m.add(space.weight(i));
  return m.value();
}

SimpleFunctionForm simple_levels(const FunctionOnSpace& f, double value_tol, double mass_tol,
                                 std::size_t k_budget) {
  if (!f.bound()) throw BindingError("function is not bound to a space");
  if (!(value_tol >= 0) || !(mass_tol >= 0)) throw ArgumentError("tolerances must be nonnegative");
  const Space& s = f.space();
  for (double v : f.values())
    if (!std::isfinite(v)) throw ArgumentError("simple_levels needs a bounded function");
  SimpleFunctionForm out;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(f[i]) <= value_tol) out.zero_set.push_back(i);
    else order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  const double min_mass = mass_tol * s.total_mass();
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && f[order[j]] - f[order[j - 1]] <= value_tol) ++j;
    ++out.cluster_count;
    IndexSet set(order.begin() + i, order.begin() + j);
    std::sort(set.begin(), set.end());
    CompensatedSum mass, moment;
    for (std::size_t k : set) {
      mass.add(s.weight(k));
      moment.add(s.weight(k) * f[k]);
    }
    if (mass.value() < min_mass || mass.value() == 0) {
      out.residual.insert(out.residual.end(), set.begin(), set.end());
    } else {
      out.levels.push_back(moment.value() / mass.value());
      out.sets.push_back(std::move(set));
    }
    i = j;
  }
  std::sort(out.residual.begin(), out.residual.end());
  if (out.levels.size() > k_budget) out.simple = false;
  return out;
}

std::vector<IndexSet> disjointify(const Space& space, const std::vector<IndexSet>& sets, double mass_tol) {
  const std::size_t n = space.size();
  std::vector<std::vector<std::size_t>> membership(n);
  for (std::size_t k = 0; k < sets.size(); ++k)
    for (std::size_t i : sets[k]) {
      if (i >= n) throw ArgumentError("set index out of range");
      if (membership[i].empty() || membership[i].back() != k) membership[i].push_back(k);
    }
  // Points with identical membership form one piece of the refinement.
  std::map<std::vector<std::size_t>, std::size_t> piece_of;
  struct Piece {
    IndexSet points;
    std::vector<std::size_t> sources;
    double mass = 0;
    bool alive = true;
  };
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < n; ++i) {
    if (membership[i].empty()) continue;
    auto [it, inserted] = piece_of.try_emplace(membership[i], pieces.size());
    if (inserted) pieces.push_back({{}, membership[i], 0, true});
    pieces[it->second].points.push_back(i);
  }
  for (auto& pc : pieces) pc.mass = set_mass(space, pc.points);

  const double min_mass = mass_tol * space.total_mass();
  auto shares = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) return true;
      if (a[i] < b[j]) ++i;
      else ++j;
    }
    return false;
  };
  for (;;) {
    std::size_t alive = 0, shard = pieces.size();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      if (!pieces[k].alive) continue;
      ++alive;
      if (pieces[k].mass < min_mass && (shard == pieces.size() || pieces[k].mass < pieces[shard].mass))
        shard = k;
    }
    if (shard == pieces.size() || alive <= 1) break;
    std::size_t target = pieces.size();
    for (int pass = 0; pass < 2 && target == pieces.size(); ++pass)
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (k == shard || !pieces[k].alive) continue;
        if (pass == 0 && !shares(pieces[k].sources, pieces[shard].sources)) continue;
        if (target == pieces.size() || pieces[k].mass > pieces[target].mass) target = k;
      }
    Piece& t = pieces[target];
    Piece& sh = pieces[shard];
    t.points.insert(t.points.end(), sh.points.begin(), sh.points.end());
    std::sort(t.points.begin(), t.points.end());
    std::vector<std::size_t> src;
    std::set_union(t.sources.begin(), t.sources.end(), sh.sources.begin(), sh.sources.end(),
                   std::back_inserter(src));
    t.sources = std::move(src);
    t.mass = set_mass(space, t.points);
    sh.alive = false;
  }
  std::vector<IndexSet> out;
  for (auto& pc : pieces)
    if (pc.alive) out.push_back(std::move(pc.points));
  std::sort(out.begin(), out.end(), [](const IndexSet& a, const IndexSet& b) { return a.front() < b.front(); });
  return out;
}

std::vector<std::size_t> nearest_atoms(const Space& from, const Space& to) {
  if (from.size() == 0) throw ArgumentError("empty source space");
  if (from.metric_kind() != MetricKind::euclidean || to.metric_kind() != MetricKind::euclidean ||
      from.dim() != to.dim())
    throw ArgumentError("nearest atoms need Euclidean spaces of equal dimension");
  std::vector<std::size_t> out(to.size());
  const double r0 = from.size() > 1 ? from.min_distance() : 1.0;
  parallel_chunks(to.size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double* q = to.point(i);
      for (double r = r0;; r *= 2) {
        auto cand = from.index().ball_at(q, r);
        if (cand.empty()) continue;
        std::size_t best = cand.front();
        double bd = euclid(from.point(best), q, from.dim());
        for (std::size_t c : cand) {
          double d = euclid(from.point(c), q, from.dim());
          if (d < bd || (d == bd && c < best)) {
            best = c;
            bd = d;
          }
        }
        out[i] = best;
        break;
      }
    }
  });
  return out;
}

IndexSet transfer_set(const Space& from, const IndexSet& set, const Space& to) {
  if (&from == &to) return set;
  std::vector<char> in(from.size(), 0);
  for (std::size_t i : set) in.at(i) = 1;
  auto near = nearest_atoms(from, to);
  IndexSet out;
  for (std::size_t i = 0; i < to.size(); ++i)
    if (in[near[i]]) out.push_back(i);
  return out;
}

SetCertificate certify_set(const SpaceFamily& family, const IndexSet& set, double p, double theta,
                           const CertificateOptions& opt) {
  if (family.spaces.size() < 2) throw ResolutionError("certificates need at least 2 levels");
  const Space& fine = family.finest();
  SetCertificate cert;
  if (set.size() == fine.size()) {
    cert.energies.assign(family.spaces.size(), 0.0);
    cert.growth.zero_energy = true;
    cert.ks_tail_slope = std::numeric_limits<double>::infinity();
    cert.ks_class = TailClass::vanishing;
    cert.level_ok = cert.ks_ok = true;
    return cert;
  }
  for (const auto& s : family.spaces) {
    IndexSet local = transfer_set(fine, set, *s);
    auto chi = indicator(s, local);
    cert.energies.push_back(besov_pp_batch(*s, {chi.values()}, p, {theta})[0][0]);
  }
  cert.growth = level_growth_slope(cert.energies, level_spacings(family));
  cert.level_ok = cert.growth.zero_energy || cert.growth.slope <= opt.slope_threshold;

  cert.ks_tail_slope = std::numeric_limits<double>::quiet_NaN();
  if (!cert.level_ok) return cert;

  auto radii = opt.radii.empty() ? default_radii(fine) : opt.radii;
  MultiscaleOptions mo;
  mo.with_besov = false;
  mo.with_dyadic = false;
  auto prof = multiscale_energy(indicator(family.spaces.back(), set), p, theta, radii, mo);
  KsTail tail;
  try {
    tail = ks_energy_tail(prof, opt.tail_fraction);
  } catch (const ResolutionError&) {
    // Too few decades on this level; the certificate stays open.
    return cert;
  }
  cert.ks_class = tail.classification;
  if (tail.energy == 0) cert.ks_tail_slope = std::numeric_limits<double>::infinity();
  else if (tail.fit.count >= 4) cert.ks_tail_slope = tail.fit.alpha;
  cert.ks_ok = cert.ks_tail_slope > 0;
  return cert;
}

std::vector<int> Decomposition::labels(std::size_t n) const {
  std::vector<int> out(n, -1);
  for (std::size_t k = 0; k < components.size(); ++k)
    for (std::size_t i : components[k]) out.at(i) = static_cast<int>(k);
  return out;
}

namespace {

void finish_masses(Decomposition& d, const Space& s) {
  d.k = d.components.size();
  d.masses.clear();
  for (const auto& c : d.components) d.masses.push_back(set_mass(s, c));
  std::vector<char> covered(s.size(), 0);
  for (const auto& c : d.components)
    for (std::size_t i : c) covered[i] = 1;
  d.residual.clear();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!covered[i]) d.residual.push_back(i);
  d.residual_mass = set_mass(s, d.residual);
  d.finite_mass = std::isfinite(s.total_mass());
}

}  // namespace

Decomposition basis_extract(const std::vector<FunctionGenerator>& candidates, double p, double theta,
                            const SpaceFamily& family, const BasisOptions& opt) {
  if (family.spaces.size() < 2) throw ResolutionError("basis extraction needs at least 2 levels");
  const auto& fine_ptr = family.spaces.back();
  const Space& fine = *fine_ptr;
  const auto h = level_spacings(family);
  Decomposition d;
  d.p = p;
  d.theta = theta;
  d.slope_threshold = opt.certificate.slope_threshold;
  d.mass_tol = opt.mass_tol;

  std::vector<IndexSet> pool;
  for (const auto& c : candidates) {
    std::vector<double> e;
    FunctionOnSpace f_fine;
    for (const auto& s : family.spaces) {
      auto f = c.make(s);
      e.push_back(besov_pp_batch(*s, {f.values()}, p, {theta})[0][0]);
      if (s == fine_ptr) f_fine = f;
    }
    auto g = level_growth_slope(e, h);
    if (!g.zero_energy && g.slope > opt.certificate.slope_threshold)
      throw PreconditionError("candidate " + c.name + " fails the finite-Besov certificate (slope " +
                              std::to_string(g.slope) + ")");
    auto form = simple_levels(f_fine, opt.value_tol, opt.mass_tol, opt.k_budget);
    if (!form.simple) {
      d.indeterminate = true;
      continue;
    }
    for (auto& s : form.sets) pool.push_back(std::move(s));
  }
  if (std::isfinite(fine.total_mass())) {
    IndexSet all(fine.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    pool.push_back(std::move(all));
  }
  auto pieces = disjointify(fine, pool, opt.mass_tol);
  std::vector<SetCertificate> certs(pieces.size());
  for (std::size_t k = 0; k < pieces.size(); ++k) certs[k] = certify_set(family, pieces[k], p, theta, opt.certificate);
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (!certs[k].level_ok) continue;
    d.components.push_back(std::move(pieces[k]));
    d.certificates.push_back(std::move(certs[k]));
  }
  finish_masses(d, fine);
  if (d.k == 0) d.indeterminate = true;
  return d;
}

Decomposition detect_components(const SpaceFamily& family, double p, double theta, std::size_t k_max,
                                const DetectOptions& opt) {
  if (family.spaces.size() < 2) throw ResolutionError("component detection needs at least 2 levels");
  if (k_max == 0) throw ArgumentError("k_max must be positive");
  const Space& fine = family.finest();
  std::size_t level = 0;
  for (std::size_t l = 0; l < family.spaces.size(); ++l)
    if (family.spaces[l]->size() <= opt.search_limit) level = l;
  const SpacePtr& sp = family.spaces[level];
  if (sp->size() > 4 * opt.search_limit) throw ResourceError("coupling graph", sp->size(), opt.search_limit);
  const std::size_t n = sp->size();

  // Dense coupling of the search level.
  PairKernel kernel(sp);
  auto s = kernel.weights(p, theta);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  kernel.for_each_pair([&](std::uint32_t x, std::uint32_t y, std::size_t k) { W(x, y) = W(y, x) = s[k]; });

  Decomposition d;
  d.p = p;
  d.theta = theta;
  d.slope_threshold = opt.certificate.slope_threshold;
  d.mass_tol = opt.mass_tol;
  d.search_level = family.levels[level];
  const double min_mass = opt.mass_tol * sp->total_mass();

  // Best ratio cut of a component along its Fiedler ordering, or empty.
  auto best_cut = [&](const IndexSet& comp) -> IndexSet {
    const std::size_t m = comp.size();
    if (m < 2) return {};
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd deg(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) A(i, j) = W(comp[i], comp[j]);
    deg = A.rowwise().sum();
    for (std::size_t i = 0; i < m; ++i)
      if (!(deg[i] > 0)) return {};
    Eigen::VectorXd is = deg.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd M = is.asDiagonal() * A * is.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) return {};
    Eigen::VectorXd v = es.eigenvectors().col(m - 2).cwiseProduct(is);
    for (std::size_t i = 0; i < m; ++i)
      if (std::abs(v[i]) > 1e-14) {
        if (v[i] < 0) v = -v;
        break;
      }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Eigen::VectorXd to_in = Eigen::VectorXd::Zero(m);
    double total = 0;
    for (std::size_t i : comp) total += sp->weight(i);
    double cut = 0, mass = 0, best = std::numeric_limits<double>::infinity();
    std::size_t best_len = 0;
    for (std::size_t t = 0; t + 1 < m; ++t) {
      std::size_t x = order[t];
      cut += deg[x] - 2 * to_in[x];
      to_in += A.col(x);
      mass += sp->weight(comp[x]);
      double small = std::min(mass, total - mass);
      if (small < min_mass || small <= 0) continue;
      double ratio = cut / small;
      if (ratio < best) {
        best = ratio;
        best_len = t + 1;
      }
    }
    if (best_len == 0) return {};
    IndexSet S;
    for (std::size_t t = 0; t < best_len; ++t) S.push_back(comp[order[t]]);
    std::sort(S.begin(), S.end());
    return S;
  };

  auto complement_in = [](const IndexSet& comp, const IndexSet& part) {
    IndexSet out;
    std::set_difference(comp.begin(), comp.end(), part.begin(), part.end(), std::back_inserter(out));
    return out;
  };

  IndexSet all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<IndexSet> done, queue{all};
  std::vector<SetCertificate> done_cert, queue_cert{certify_set(family, transfer_set(*sp, all, fine), p, theta, opt.certificate)};
  while (!queue.empty()) {
    IndexSet comp = std::move(queue.front());
    SetCertificate cc = std::move(queue_cert.front());
    queue.erase(queue.begin());
    queue_cert.erase(queue_cert.begin());
    if (done.size() + queue.size() + 1 < k_max) {
      IndexSet S = best_cut(comp);
      if (!S.empty()) {
        IndexSet R = complement_in(comp, S);
        auto cs = certify_set(family, transfer_set(*sp, S, fine), p, theta, opt.certificate);
        if (cs.pass()) {
          auto cr = certify_set(family, transfer_set(*sp, R, fine), p, theta, opt.certificate);
          if (cr.pass()) {
            queue.push_back(std::move(S));
            queue_cert.push_back(std::move(cs));
            queue.push_back(std::move(R));
            queue_cert.push_back(std::move(cr));
            continue;
          }
        }
      }
    }
    done.push_back(std::move(comp));
    done_cert.push_back(std::move(cc));
  }
  std::vector<std::size_t> order(done.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return done[a].front() < done[b].front(); });
  for (std::size_t k : order) {
    d.components.push_back(transfer_set(*sp, done[k], fine));
    d.certificates.push_back(std::move(done_cert[k]));
  }
  finish_masses(d, fine);
  return d;
}

LocalizationResult localization_check(const FunctionOnSpace& u, const IndexSet& set, double p, double theta,
                                      const std::vector<double>& radii, const SetCertificate& certificate,
                                      double tail_fraction) {
  if (!certificate.level_ok)
    throw PreconditionError("indicator of the set fails the finite-Besov certificate");
  if (!u.bound()) throw BindingError("function is not bound to a space");
  if (radii.empty()) throw ArgumentError("no radii");
  for (double v : u.values())
    if (!std::isfinite(v)) throw ArgumentError("localization needs a bounded function");
  const Space& s = u.space();
  std::vector<char> in(s.size(), 0);
  for (std::size_t i : set) in.at(i) = 1;

  LocalizationResult res;
  res.radii = radii;
  std::vector<double> uv(s.size(), 0.0);
  for (std::size_t i : set) uv[i] = u[i];
  res.lhs = multiscale_unscaled(FunctionOnSpace(u.space_ptr(), uv), p, radii);

  const double rmax = *std::max_element(radii.begin(), radii.end());
  const std::size_t nr = radii.size();
  const std::size_t chunk = 64;
  const std::size_t chunks = (set.size() + chunk - 1) / chunk;
  std::vector<std::vector<CompensatedSum>> parts(chunks, std::vector<CompensatedSum>(nr));
  parallel_chunks(set.size(), chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<std::pair<double, double>> nb;
    for (std::size_t k = b; k < e; ++k) {
      std::size_t x = set[k];
      nb.clear();
      for (std::size_t y : s.index().ball(x, rmax))
        if (in[y] && y != x) {
          double d = std::abs(u[x] - u[y]);
          if (d != 0) nb.push_back({s.distance(x, y), pow_p(d, p) * s.weight(y)});
        }
      std::sort(nb.begin(), nb.end());
      std::vector<double> cum(nb.size() + 1, 0.0);
      for (std::size_t i = 0; i < nb.size(); ++i) cum[i + 1] = cum[i] + nb[i].second;
      for (std::size_t r = 0; r < nr; ++r) {
        auto it = std::lower_bound(nb.begin(), nb.end(), std::make_pair(radii[r], -1.0));
        double inner = cum[it - nb.begin()];
        if (inner != 0) parts[c][r].add(s.weight(x) / s.index().volume(x, radii[r]) * inner);
      }
    }
  });
  res.rhs.assign(nr, 0.0);
  for (std::size_t r = 0; r < nr; ++r) {
    std::vector<CompensatedSum> col;
    for (auto& pc : parts) col.push_back(pc[r]);
    res.rhs[r] = tree_reduce(col);
  }
  for (std::size_t r = 0; r < nr; ++r) {
    double sc = std::pow(radii[r], -theta * p);
    res.lhs[r] *= sc;
    res.rhs[r] *= sc;
  }
  for (std::size_t r : tail_window(radii, tail_fraction)) {
    double a = res.lhs[r], b = res.rhs[r];
    double den = std::max(std::abs(a), std::abs(b));
    if (den > 0) res.max_gap = std::max(res.max_gap, std::abs(a - b) / den);
  }
  return res;
}

const char* to_string(Irreducibility v) {
  switch (v) {
    case Irreducibility::irreducible: return "irreducible";
    case Irreducibility::reducible: return "reducible";
    case Irreducibility::indeterminate: return "indeterminate";
  }
  return "?";
}

std::vector<FunctionGenerator> default_witnesses(const SpaceFamily& family, double p) {
  const Space& s = family.finest();
  std::vector<FunctionGenerator> w;
  for (std::size_t a = 0; a < s.dim(); ++a) w.push_back(coordinate_function(a));
  std::vector<double> c(s.dim(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t a = 0; a < s.dim(); ++a) c[a] += s.weight(i) * s.point(i)[a] / s.total_mass();
  w.push_back(cone_function(c, 0.25 * s.diameter()));
  if (family.tag == "gasket" || family.tag == "gluedgaskets") w.push_back(harmonic_function("", p));
  return w;
}

IrreducibilityVerdict irreducibility_verdict(const SpaceFamily& family, double p, double theta,
                                             const std::vector<FunctionGenerator>& witnesses,
                                             const DetectOptions& options) {
  IrreducibilityVerdict v;
  v.decomposition = detect_components(family, p, theta, 8, options);
  v.k = v.decomposition.k;
  if (v.k >= 2) {
    v.verdict = Irreducibility::reducible;
    return v;
  }
  auto cands = witnesses.empty() ? default_witnesses(family, p) : witnesses;
  ThetaOptions to;
  to.slope_threshold = options.certificate.slope_threshold;
  const auto h = level_spacings(family);
  for (const auto& c : cands) {
    ThetaEvidence ev;
    ev.theta = theta;
    ev.function = c.name;
    for (const auto& s : family.spaces)
      ev.energies.push_back(besov_pp_batch(*s, {c.make(s).values()}, p, {theta})[0][0]);
    ev.growth = level_growth_slope(ev.energies, h);
    ev.pass = !ev.growth.zero_energy && ev.growth.slope <= to.slope_threshold;
    v.evidence.push_back(ev);
    if (ev.pass && v.witness.empty()) v.witness = c.name;
  }
  v.verdict = v.witness.empty() ? Irreducibility::indeterminate : Irreducibility::irreducible;
  return v;
}

}  // namespace besovlab
