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


#include "mtree/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "mtree/error.h"

namespace mtree {

namespace {

// Guards against absurd allocations from corrupt headers.
constexpr std::uint32_t kMaxCount = 1u << 28;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), n); }

  void u8(std::uint8_t v) { bytes(&v, 1); }

  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }

  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void floats(const std::vector<float>& v) {
    for (float x : v) f32(x);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("model file is truncated");
  }

  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }

  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint32_t count(const char* what) {
    const std::uint32_t v = u32();
    if (v > kMaxCount) throw FormatError(std::string("implausible ") + what + " in model file");
    return v;
  }

  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }

  std::string str() {
    const std::uint32_t n = count("string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

  void floats(std::vector<float>& v) {
    for (float& x : v) x = f32();
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(const Model& model, std::ostream& out) {
  Writer w(out);
  w.bytes(kModelMagic, 4);
  w.u32(kModelVersion);
  w.u8(static_cast<std::uint8_t>(model.mode));
  w.u32(static_cast<std::uint32_t>(model.arity()));
  w.u32(static_cast<std::uint32_t>(model.tree.depth_cap().value_or(0)));
  w.u32(static_cast<std::uint32_t>(model.words.size()));
  w.u32(static_cast<std::uint32_t>(model.dim));
  w.u32(static_cast<std::uint32_t>(model.window));
  for (const auto& word : model.words.words()) w.str(word);
  w.u32(static_cast<std::uint32_t>(model.labels.size()));
  for (const auto& label : model.labels.words()) w.str(label);
  w.floats(model.embeddings.data());
  for (const auto& r : model.transitions) w.floats(r.data());
  w.u32(static_cast<std::uint32_t>(model.tree.num_internal()));
  if (model.tree.num_internal() == 0) {
    w.i32(*model.tree.root_leaf());
  } else {
    for (std::int32_t slot : model.tree.slots()) w.i32(slot);
  }
  for (const auto& node : model.nodes) {
    w.floats(node.weights.data());
    w.floats(node.bias);
  }
  if (!out) throw IoError("failed writing model");
}

Model read_model(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0) throw FormatError("not a model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  const std::uint8_t mode_byte = r.u8();
  if (mode_byte > 1) throw FormatError("unknown mode byte " + std::to_string(mode_byte));
  const std::uint32_t arity = r.u32();
  const std::uint32_t depth = r.u32();
  const std::uint32_t vocab = r.count("vocabulary size");
  const std::uint32_t dim = r.count("dimension");
  const std::uint32_t window = r.count("context window");
  if (arity < 2 || arity > kMaxCount || dim == 0) throw FormatError("invalid model dimensions");

  Model model;
  model.mode = static_cast<Mode>(mode_byte);
  model.dim = static_cast<int>(dim);
  model.window = static_cast<int>(window);
  if ((model.mode == Mode::kDensity) != (window > 0)) throw FormatError("context window does not match mode");
  std::vector<std::string> words(vocab);
  for (auto& word : words) word = r.str();
  const std::uint32_t num_labels = r.count("label count");
  std::vector<std::string> labels(num_labels);
  for (auto& label : labels) label = r.str();
  model.words = Vocabulary(std::move(words));
  model.labels = Vocabulary(std::move(labels));

  model.embeddings = Matrix<float>(static_cast<int>(vocab), model.dim);
  r.floats(model.embeddings.data());
  for (std::uint32_t k = 0; k < window; ++k) {
    Matrix<float> t(model.dim, model.dim);
    r.floats(t.data());
    model.transitions.push_back(std::move(t));
  }

  const std::uint32_t internal = r.count("node count");
  const std::optional<int> cap = depth == 0 ? std::nullopt : std::optional<int>(static_cast<int>(depth));
  try {
    if (internal == 0) {
      model.tree = Tree::single_leaf(static_cast<int>(arity), r.i32(), cap);
    } else {
      std::vector<std::int32_t> slots(static_cast<std::size_t>(internal) * arity);
      for (auto& s : slots) s = r.i32();
      model.tree = Tree::from_slots(static_cast<int>(arity), cap, std::move(slots));
    }
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("corrupt tree in model file: ") + e.what());
  }
  const std::vector<Label> expected = model.label_set();
  if (model.tree.labels() != expected) throw FormatError("tree labels do not match the label vocabulary");

  model.nodes.assign(internal, NodeParams<float>(static_cast<int>(arity), model.dim));
  for (auto& node : model.nodes) {
    r.floats(node.weights.data());
    r.floats(node.bias);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after model");
  return model;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_model(model, out);
  out.close();
  if (!out) throw IoError("failed writing " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_model(in);
}

}  // namespace mtree
