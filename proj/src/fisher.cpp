// Copyright 2026 The hpq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hpq/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hpq/error.hpp"
#include "hpq/parallel.hpp"

namespace hpq {
namespace {

constexpr double kPi = std::numbers::pi;

double pairwise_sum(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, count - half);
}

// f (d_r ln f)^2 at x. With z = r x reduced into [-pi/2, pi/2] the score is
// 2x (R cot(Rz) - cot(z)), which vanishes at z = 0; the series branch keeps
// that cancellation exact.
double fisher_integrand(double x, double r, int R) {
  const double k = std::round(r * x / kPi);
  const double z = r * x - k * kPi;
  const double Rd = static_cast<double>(R);
  double amp;
  if (Rd * std::abs(z) < 1e-3) {
    const double ratio = Rd * z == 0.0 ? Rd : std::sin(Rd * z) / std::sin(z);
    const double R2 = Rd * Rd;
    const double h = -(R2 - 1.0) * z / 3.0 - (R2 * R2 - 1.0) * z * z * z / 45.0;
    amp = ratio * h;
  } else {
    amp = (Rd * std::cos(Rd * z) - std::sin(Rd * z) * std::cos(z) / std::sin(z)) / std::sin(z);
  }
  return 4.0 * x * x * amp * amp / (kPi * Rd);
}

}  // namespace

DfiValue dfi(const OutcomeDistribution& p_r, const OutcomeDistribution& p_r1) {
  if (p_r.n != p_r1.n || p_r.dim() != p_r1.dim()) {
    throw ParameterError("DFI needs distributions of equal width");
  }
  DfiValue out;
  std::vector<double> terms(p_r.dim(), 0.0);
  for (std::size_t x = 0; x < p_r.dim(); ++x) {
    const double a = p_r[x], b = p_r1[x];
    if (a <= kZeroProbability) {
      if (b > kZeroProbability) out.offending.push_back(x);
      continue;
    }
    const double d = b - a;
    terms[x] = d * d / a;
  }
  if (!out.offending.empty()) {
    out.infinite = true;
    return out;
  }
  out.value = pairwise_sum(terms.data(), terms.size());
  return out;
}

double hcr_bound(double dfi_value, double eps) {
  if (!(dfi_value > 0.0) || !(eps > 0.0)) throw ParameterError("HCR bound needs dfi > 0 and eps > 0");
  if (std::isinf(dfi_value)) return 0.0;
  return std::log1p(1.0 / (eps * eps)) / std::log1p(dfi_value);
}

double qft_dfi_exact(double r, int R) {
  if (!(r >= 1.0) || R < 1) throw ParameterError("qft_dfi_exact needs r >= 1 and R >= 1");
  const double Rd = R;
  const bool integral = r == std::floor(r);
  double sum = 0.0;
  for (int j = 1; j < R; ++j) {
    const double jd = j;
    double m;
    if (integral) {
      m = kPi / (2.0 * jd * jd * r * r);
    } else {
      const double a = 2.0 * kPi * jd * r;
      const double t = 2.0 * jd * r;
      m = (2.0 * a * std::cos(a) + (a * a - 2.0) * std::sin(a)) / (t * t * t);
    }
    sum += (Rd - jd) * (Rd * Rd - 2.0 * Rd * jd - 2.0 * jd * jd - 1.0) * m;
  }
  return 4.0 * kPi * kPi / 9.0 * (Rd * Rd - 1.0) + 8.0 / (3.0 * kPi * Rd) * sum;
}

double qft_dfi_asymptotic(double r, int n) {
  if (!(r >= 1.0)) throw ParameterError("period must be >= 1");
  const double scale = std::ldexp(1.0, n);
  return 4.0 * kPi * kPi / 9.0 * (scale * scale / (r * r) - 1.0);
}

double qft_dfi_quadrature(double r, int R) {
  if (!(r >= 1.0) || R < 2) throw ParameterError("qft_dfi_quadrature needs r >= 1 and R >= 2");
  constexpr double kOffset = 1e-9;
  constexpr double kTol = 1e-10;
  using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto g = [&](double x) { return fisher_integrand(x, r, R); };

  // Break points: zeros of sin(R r x) in [0, pi], plus pi itself.
  const double step = kPi / (R * r);
  std::vector<double> cuts;
  for (int k = 0; k * step < kPi; ++k) cuts.push_back(k * step);
  if (kPi - cuts.back() < 4.0 * kOffset) cuts.back() = kPi; else cuts.push_back(kPi);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i] + kOffset, b = cuts[i + 1] - kOffset;
    double err = 0.0, l1 = 0.0;
    const double piece = Gk::integrate(g, a, b, 30, kTol, &err, &l1);
    if (!std::isfinite(piece) || err > 1e3 * kTol * std::max(l1, 1e-300) + 1e-14) {
      std::ostringstream os;
      os << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << piece
         << ", error " << err << " (r=" << r << ", R=" << R << ")";
      throw NumericError(os.str());
    }
    total += piece;
  }
  // Excluded slivers around each cut, from the symmetric limit.
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double x0 = cuts[i];
    if (i == 0) {
      total += kOffset * g(kOffset);
    } else if (i + 1 == cuts.size()) {
      total += kOffset * g(x0 - kOffset);
    } else {
      total += kOffset * (g(x0 - kOffset) + g(x0 + kOffset));
    }
  }
  return total;
}

std::uint64_t period_window(int n) {
  check_width(n);
  // floor(sqrt(2^n)) exactly.
  std::uint64_t w = std::uint64_t{1} << (n / 2);
  if (n % 2 == 1) {
    const std::uint64_t target = std::uint64_t{1} << n;
    w = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(target)));
    while (w * w > target) --w;
    while ((w + 1) * (w + 1) <= target) ++w;
  }
  return w;
}

DfiScanResult dfi_min_scan(const Transform& u, const std::string& circuit_name) {
  const int n = u.n();
  if (n < 2) throw ParameterError("DFI scan needs n >= 2");
  const std::uint64_t window = period_window(n);
  std::vector<OutcomeDistribution> dists(window + 1);
  parallel_for(dists.size(), [&](std::size_t i) {
    dists[i] = periodic_distribution(u, periodic_support(n, i + 1, 0));
  });
  DfiScanResult res;
  res.n = n;
  res.circuit = circuit_name;
  res.entries.resize(window);
  parallel_for(window, [&](std::size_t i) {
    res.entries[i] = {i + 1, dfi(dists[i], dists[i + 1])};
  });
  for (const auto& e : res.entries) {
    if (e.value.infinite) {
      ++res.excluded;
      continue;
    }
    if (!res.dfi_min || e.value.value < *res.dfi_min) {
      res.dfi_min = e.value.value;
      res.argmin = e.r;
    }
  }
  return res;
}

void write_scan_csv(std::span<const DfiScanResult> scans, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "n,r,dfi\n";
  char buf[32];
  for (const auto& s : scans) {
    for (const auto& e : s.entries) {
      out << s.n << ',' << e.r << ',';
      if (e.value.infinite) {
        out << "inf\n";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", e.value.value);
        out << buf << '\n';
      }
    }
  }
}

}  // namespace hpq
