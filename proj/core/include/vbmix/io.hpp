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

#ifndef VBMIX_IO_HPP_
#define VBMIX_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbmix/posterior.hpp"

namespace vbmix {

class CorruptArtifacts : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// JSON dump of the mixture; doubles round-trip exactly.
std::string posterior_to_json(const MixturePosterior& post);
/// Throws CorruptArtifacts on malformed input.
MixturePosterior posterior_from_json(const std::string& text);

/// Minimal CSV builder with shortest round-trip number formatting.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& row(const std::vector<double>& values);
  const std::string& str() const { return text_; }

 private:
  std::string text_;
  std::size_t width_;
};

std::string format_double(double v);

}  // namespace vbmix

#endif  // VBMIX_IO_HPP_
