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

#include "hpq/group.hpp"

#include <algorithm>
#include <set>

#include "gtest/gtest.h"

#include "hpq/error.hpp"

using namespace hpq;

using Elems = std::vector<std::uint64_t>;

TEST(group, subgroup_elements) {
  EXPECT_EQ(subgroup_elements({3, 1}), (Elems{0, 2, 4, 6}));
  EXPECT_EQ(subgroup_elements({3, 3}), (Elems{0}));
  EXPECT_EQ(subgroup_elements({3, 0}), (Elems{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_THROW(subgroup_elements({3, 4}), ParameterError);
  EXPECT_THROW(subgroup_elements({3, -1}), ParameterError);
}

TEST(group, coset_elements) {
  EXPECT_EQ(coset_elements({{3, 1}, 1}), (Elems{1, 3, 5, 7}));
  EXPECT_EQ(coset_elements({{3, 1}, 0}), (Elems{0, 2, 4, 6}));
  EXPECT_EQ(coset_elements({{2, 2}, 3}), (Elems{3}));
  EXPECT_THROW(coset_elements({{3, 1}, 2}), ParameterError);
}

TEST(group, cosets_partition_register) {
  for (int n = 1; n <= 10; ++n) {
    for (int p = 0; p <= n; ++p) {
      std::vector<int> hits(std::size_t{1} << n, 0);
      const SubgroupSpec v{n, p};
      for (std::uint64_t c = 0; c < v.generator(); ++c) {
        const auto elems = coset_elements({v, c});
        ASSERT_EQ(elems.size(), v.order());
        for (auto x : elems) ++hits[x];
      }
      ASSERT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; })) << n << ' ' << p;
    }
  }
}

TEST(group, periodic_support) {
  auto s = periodic_support(4, 3, 0);
  EXPECT_EQ(s.elements, (Elems{0, 3, 6, 9, 12, 15}));
  EXPECT_EQ(s.count(), 6u);
  s = periodic_support(4, 3, 2);
  EXPECT_EQ(s.elements, (Elems{2, 5, 8, 11, 14}));
  EXPECT_EQ(periodic_support(4, 1, 0).count(), 16u);
  EXPECT_THROW(periodic_support(4, 3, 3), ParameterError);
  EXPECT_THROW(periodic_support(4, 0, 0), ParameterError);
}

TEST(group, periodic_count_matches_enumeration_and_truncation_bound) {
  for (int n = 1; n <= 10; ++n) {
    const std::uint64_t dim = std::uint64_t{1} << n;
    for (std::uint64_t r = 1; r <= dim + 2; ++r) {
      const auto sup = periodic_support(n, r, 0);
      EXPECT_EQ(sup.count(), periodic_count(n, r, 0));
      EXPECT_GE(sup.count() * r, dim);
      EXPECT_LE(sup.count() * r, dim + r - 1);
      EXPECT_TRUE(std::is_sorted(sup.elements.begin(), sup.elements.end()));
      for (std::uint64_t s = 0; s < std::min<std::uint64_t>({r, dim, 5}); ++s) {
        EXPECT_EQ(periodic_support(n, r, s).count(), periodic_count(n, r, s));
      }
    }
  }
}

TEST(group, bit_convention_round_trip) {
  for (int n = 1; n <= 10; ++n) {
    for (std::uint64_t y = 0; y < (std::uint64_t{1} << n); ++y) {
      const BitString b(n, y);
      ASSERT_EQ(BitString::from_bits(b.bits()).value(), y);
      ASSERT_EQ(BitString::parse(b.to_string()), b);
    }
  }
  const BitString b(3, 0b100);
  EXPECT_EQ(b.bit(1), 1);
  EXPECT_EQ(b.bit(3), 0);
  EXPECT_EQ(b.to_string(), "100");
  EXPECT_THROW(BitString(3, 8), ParameterError);
  EXPECT_THROW(BitString::parse("10a"), ParameterError);
  EXPECT_THROW(check_width(25), ParameterError);
}
