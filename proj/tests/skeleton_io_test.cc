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

#include "hpq/skeleton_io.hpp"

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"

#include "hpq/error.hpp"

using namespace hpq;

TEST(skeleton_io, round_trip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sk = sample_random_skeleton(6, 1 + static_cast<int>(seed % 4), seed);
    EXPECT_EQ(skeleton_from_json(skeleton_to_json(sk)), sk);
    EXPECT_EQ(parse_skeleton(skeleton_to_json(sk).dump()), sk);
  }
  const auto path = std::filesystem::path(::testing::TempDir()) / "hp1.json";
  save_skeleton(build_fixed_hp1(7), path);
  EXPECT_EQ(load_skeleton(path), build_fixed_hp1(7));
}

TEST(skeleton_io, document_shape) {
  const auto doc = skeleton_to_json(build_fixed_hp1(2));
  EXPECT_EQ(doc.at("version"), kSkeletonSchemaVersion);
  EXPECT_EQ(doc.at("n"), 2);
  EXPECT_EQ(doc.at("layers"), nlohmann::json::parse("[[1],[2]]"));
  ASSERT_EQ(doc.at("phases").size(), 1u);
  EXPECT_EQ(doc.at("phases")[0].at("i"), 1);
  EXPECT_EQ(doc.at("phases")[0].at("j"), 2);
}

TEST(skeleton_io, malformed_input_is_io_error) {
  EXPECT_THROW(parse_skeleton("{not json"), IoError);
  EXPECT_THROW(parse_skeleton("[1,2,3]"), IoError);
  EXPECT_THROW(parse_skeleton(R"({"version":1,"n":2,"layers":[[1],[2]]})"), IoError);
  EXPECT_THROW(parse_skeleton(R"({"version":7,"n":2,"layers":[[1],[2]],"phases":[]})"), IoError);
  EXPECT_THROW(parse_skeleton(R"({"version":1,"n":"two","layers":[[1],[2]],"phases":[]})"), IoError);
  EXPECT_THROW(load_skeleton("/nonexistent/skeleton.json"), IoError);
}

TEST(skeleton_io, invalid_skeleton_is_validation_error) {
  // Qubit 2 receives no Hadamard.
  EXPECT_THROW(parse_skeleton(R"({"version":1,"n":2,"layers":[[1]],"phases":[]})"), ValidationError);
  // Phase between qubits in the same layer.
  EXPECT_THROW(parse_skeleton(R"({"version":1,"n":2,"layers":[[1,2]],"phases":[{"i":1,"j":2,"theta":1.0}]})"),
               ValidationError);
  // Unvalidated parse keeps the raw structure.
  const auto sk = skeleton_from_json(nlohmann::json::parse(R"({"version":1,"n":2,"layers":[[1]],"phases":[]})"));
  EXPECT_TRUE(validate_skeleton(sk).violates(Rule::kPartition));
}
