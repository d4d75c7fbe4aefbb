// Copyright 2026 The vbmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vbmix/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace vbmix {

using nlohmann::json;

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptArtifacts("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string posterior_to_json(const MixturePosterior& post) {
  json comps = json::array();
  for (const auto& c : post.components) {
    json w = json::array();
    for (Eigen::Index k = 0; k < c.W.cols(); ++k) w.push_back(vec_to_json(c.W.col(k)));
    comps.push_back({{"id", c.id},
                     {"weight", c.weight},
                     {"log_weight", c.log_weight},
                     {"mu", vec_to_json(c.mu)},
                     {"W_columns", w},
                     {"lambda", vec_to_json(c.lambda)},
                     {"lambda0", vec_to_json(c.lambda0)},
                     {"lambda_eta", c.lambda_eta},
                     {"lambda0_eta", c.lambda0_eta},
                     {"residual_enabled", c.residual_enabled},
                     {"forward_calls", c.forward_calls},
                     {"mu_iterations", c.mu_iterations}});
  }
  json root = {{"d_psi", post.d_psi()}, {"components", comps}};
  return root.dump(1) + "\n";
}

MixturePosterior posterior_from_json(const std::string& text) {
  MixturePosterior post;
  try {
    const json root = json::parse(text);
    const int d = root.at("d_psi").get<int>();
    for (const auto& jc : root.at("components")) {
      MixtureComponent c;
      c.id = jc.at("id").get<int>();
      c.weight = jc.at("weight").get<double>();
      c.log_weight = jc.at("log_weight").get<double>();
      c.mu = vec_from_json(jc.at("mu"));
      const auto& cols = jc.at("W_columns");
      c.W.resize(d, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const Eigen::VectorXd col = vec_from_json(cols[k]);
        if (col.size() != d) throw CorruptArtifacts("basis column has wrong length");
        c.W.col(static_cast<Eigen::Index>(k)) = col;
      }
      c.lambda = vec_from_json(jc.at("lambda"));
      c.lambda0 = vec_from_json(jc.at("lambda0"));
      c.lambda_eta = jc.at("lambda_eta").get<double>();
      c.lambda0_eta = jc.at("lambda0_eta").get<double>();
      c.residual_enabled = jc.at("residual_enabled").get<bool>();
      c.forward_calls = jc.value("forward_calls", 0L);
      c.mu_iterations = jc.value("mu_iterations", 0);
      if (c.mu.size() != d) throw CorruptArtifacts("mean has wrong length");
      post.components.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw CorruptArtifacts(std::string("malformed posterior: ") + e.what());
  }
  return post;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    text_ += (i ? "," : "") + header[i];
  }
  text_ += "\n";
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ",";
    text_ += format_double(values[i]);
  }
  text_ += "\n";
  return *this;
}

}  // namespace vbmix
