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

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "hpq/circuit.hpp"
#include "hpq/error.hpp"
#include "hpq/group.hpp"

namespace hpq {
namespace {

// Planner calls are not thread-safe in FFTW; execution with the new-array
// interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct QftEngine::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

QftEngine::QftEngine(int n) : n_(n), plan_(std::make_unique<Plan>()) {
  check_width(n);
  const int dim = 1 << n;
  std::vector<cplx> scratch(static_cast<std::size_t>(dim));
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  // FFTW_BACKWARD is the e^{+2 pi i jk/N} sign convention.
  plan_->plan = fftw_plan_dft_1d(dim, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_->plan == nullptr) throw NumericError("FFTW failed to create a plan");
}

QftEngine::~QftEngine() = default;
QftEngine::QftEngine(QftEngine&&) noexcept = default;
QftEngine& QftEngine::operator=(QftEngine&&) noexcept = default;

void QftEngine::apply(StateVector& psi) const {
  if (psi.n() != n_) throw ParameterError("state width does not match transform width");
  auto* buf = reinterpret_cast<fftw_complex*>(psi.amplitudes().data());
  fftw_execute_dft(plan_->plan, buf, buf);
  const double scale = 1.0 / std::sqrt(static_cast<double>(psi.dim()));
  for (auto& a : psi.amplitudes()) a *= scale;
}

}  // namespace hpq
