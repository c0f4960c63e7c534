// Copyright 2026 The Authors.
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


#ifndef MTREE_MODEL_IO_H_
#define MTREE_MODEL_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "mtree/model.h"

namespace mtree {

inline constexpr char kModelMagic[4] = {'T', 'R', 'S', 'F'};
inline constexpr std::uint32_t kModelVersion = 1;

// Little-endian layout:
//   "TRSF", version u32, mode u8,
//   M, D (0 = no cap), |V|, d, T as u32,
//   |V| words (u32 length + UTF-8 bytes), label count u32 + label strings,
//   U (|V| x d) then R_1..R_T (d x d) as f32 row-major,
//   internal node count N u32, N*M slot entries i32
//   (or, when N = 0, the single label as i32),
//   per node in id order: M x d weights then M biases, f32.
// Node statistics are not stored.
void write_model(const Model& model, std::ostream& out);
Model read_model(std::istream& in);

// Throw IoError on file errors and FormatError on malformed content.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace mtree

#endif  // MTREE_MODEL_IO_H_
