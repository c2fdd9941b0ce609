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

// Skeleton files: {"version": 1, "n": int, "layers": [[...]], "phases":
// [{"i": int, "j": int, "theta": float}]}. Qubit indices are 1-based.

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "hpq/circuit.hpp"

namespace hpq {

inline constexpr int kSkeletonSchemaVersion = 1;

nlohmann::json skeleton_to_json(const Skeleton& sk);

/// Structural decode only; throws IoError on a malformed document.
Skeleton skeleton_from_json(const nlohmann::json& doc);

/// Parses and validates. Throws IoError for malformed text and
/// ValidationError (with the report) for rule violations.
Skeleton parse_skeleton(const std::string& text);

Skeleton load_skeleton(const std::filesystem::path& path);
void save_skeleton(const Skeleton& sk, const std::filesystem::path& path);

}  // namespace hpq
