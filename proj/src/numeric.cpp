#include "besovlab/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "besovlab/errors.hpp"

namespace besovlab {

namespace {
std::atomic<unsigned> g_jobs{1};
}

void set_default_jobs(unsigned jobs) { g_jobs = std::max(1u, jobs); }
unsigned default_jobs() { return g_jobs.load(); }

std::size_t point_budget() {
  const char* env = std::getenv("BESOVLAB_BUDGET");
  if (env && *env) {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (...) {
      throw ArgumentError(std::string("BESOVLAB_BUDGET is not an integer: ") + env);
    }
  }
  return 4000000;
}

void check_budget(const char* what, std::size_t requested) {
  std::size_t budget = point_budget();
  if (requested > budget) throw ResourceError(what, requested, budget);
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     unsigned jobs) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  std::size_t chunks = (n + chunk - 1) / chunk;
  if (jobs == 0) jobs = default_jobs();
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, chunks));
  if (jobs <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks || failed) return;
      try {
        body(c, c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double tree_reduce(const std::vector<CompensatedSum>& parts) {
  if (parts.empty()) return 0.0;
  std::vector<CompensatedSum> level = parts;
  while (level.size() > 1) {
    std::vector<CompensatedSum> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = level[2 * i];
      if (2 * i + 1 < level.size()) next[i].add(level[2 * i + 1]);
    }
    level.swap(next);
  }
  return level[0].value();
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term,
                         unsigned jobs) {
  constexpr std::size_t kChunk = 64;
  std::vector<CompensatedSum> parts((n + kChunk - 1) / kChunk);
  parallel_chunks(
      n, kChunk,
      [&](std::size_t c, std::size_t b, std::size_t e) {
        CompensatedSum s;
        for (std::size_t i = b; i < e; ++i) s.add(term(i));
        parts[c] = s;
      },
      jobs);
  return tree_reduce(parts);
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  std::size_t n = std::min(x.size(), y.size());
  f.count = n;
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.residual_rms = std::sqrt(ssr / n);
  f.r_squared = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return f;
}

std::vector<double> log_spaced_desc(double hi, double lo, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  if (n == 1) return {hi};
  double a = std::log(hi), b = std::log(lo);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * double(i) / double(n - 1)));
  out.front() = hi;
  out.back() = lo;
  return out;
}

}  // namespace besovlab
