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

#include <fstream>
#include <sstream>

#include "hpq/error.hpp"

namespace hpq {

using nlohmann::json;

json skeleton_to_json(const Skeleton& sk) {
  json phases = json::array();
  for (const auto& g : sk.phases) phases.push_back({{"i", g.i}, {"j", g.j}, {"theta", g.theta}});
  return {{"version", kSkeletonSchemaVersion}, {"n", sk.n}, {"layers", sk.layers}, {"phases", phases}};
}

Skeleton skeleton_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw IoError("skeleton document must be a JSON object");
    const int version = doc.at("version").get<int>();
    if (version != kSkeletonSchemaVersion) {
      throw IoError("unsupported skeleton schema version " + std::to_string(version));
    }
    Skeleton sk;
    sk.n = doc.at("n").get<int>();
    sk.layers = doc.at("layers").get<std::vector<std::vector<int>>>();
    for (const auto& g : doc.at("phases")) {
      sk.phases.push_back({g.at("i").get<int>(), g.at("j").get<int>(), g.at("theta").get<double>()});
    }
    return sk;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed skeleton: ") + e.what());
  }
}

Skeleton parse_skeleton(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("skeleton is not valid JSON: ") + e.what());
  }
  Skeleton sk = skeleton_from_json(doc);
  require_valid(sk);
  return sk;
}

Skeleton load_skeleton(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open skeleton file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_skeleton(text.str());
}

void save_skeleton(const Skeleton& sk, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write skeleton file " + path.string());
  out << skeleton_to_json(sk).dump(2) << '\n';
}

}  // namespace hpq
