// Copyright 2026 The Cascade Transfer Authors
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

#include "cascade/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

std::vector<NamedTensor> collect(const PolicyParameters& p) {
  std::vector<NamedTensor> out;
  auto add_mlp = [&](const std::string& prefix, const Mlp& m) {
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      out.push_back({prefix + ".w" + std::to_string(i), m.weights[i]});
      out.push_back({prefix + ".b" + std::to_string(i), m.biases[i]});
    }
  };
  add_mlp("actor", p.actor);
  out.push_back({"log_std", p.log_std});
  add_mlp("critic", p.critic);
  out.push_back({"obs_offset", p.obs_offset});
  out.push_back({"obs_scale", p.obs_scale});
  out.push_back({"action_scale", p.action_scale});
  out.push_back({"value_scale", Eigen::MatrixXd::Constant(1, 1, p.value_scale)});
  return out;
}

template <typename T>
void put(std::vector<std::uint8_t>& buf, T v) {
  const auto* b = reinterpret_cast<const std::uint8_t*>(&v);
  buf.insert(buf.end(), b, b + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw FormatError("checkpoint truncated");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

Mlp rebuild_mlp(const std::map<std::string, Eigen::MatrixXd>& t, const std::string& prefix) {
  Mlp m;
  for (std::size_t i = 0;; ++i) {
    auto w = t.find(prefix + ".w" + std::to_string(i));
    auto b = t.find(prefix + ".b" + std::to_string(i));
    if (w == t.end() && b == t.end()) break;
    if (w == t.end() || b == t.end() || b->second.cols() != 1 ||
        b->second.rows() != w->second.rows())
      throw FormatError("checkpoint: inconsistent layer " + prefix + std::to_string(i));
    if (!m.weights.empty() && m.weights.back().rows() != w->second.cols())
      throw FormatError("checkpoint: layer dimension mismatch in " + prefix);
    m.weights.push_back(w->second);
    m.biases.push_back(b->second.col(0));
  }
  if (m.weights.empty()) throw FormatError("checkpoint: missing " + prefix + " layers");
  return m;
}

const Eigen::MatrixXd& require(const std::map<std::string, Eigen::MatrixXd>& t,
                               const std::string& name) {
  auto it = t.find(name);
  if (it == t.end()) throw FormatError("checkpoint: missing tensor " + name);
  return it->second;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const PolicyParameters& p) {
  const auto tensors = collect(p);
  std::vector<std::uint8_t> buf(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint16_t>(buf, static_cast<std::uint16_t>(t.name.size()));
    buf.insert(buf.end(), t.name.begin(), t.name.end());
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.value.rows()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.value.cols()));
  }
  for (const auto& t : tensors)
    for (Eigen::Index i = 0; i < t.value.rows(); ++i)
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) put<double>(buf, t.value(i, j));
  put<std::uint64_t>(buf, fnv1a64(buf.data(), buf.size()));
  return buf;
}

CheckpointHeader read_checkpoint_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 16)
    throw FormatError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw FormatError("checkpoint: bad magic");
  CheckpointHeader h;
  h.file_size = bytes.size();
  std::memcpy(&h.checksum, bytes.data() + bytes.size() - 8, 8);
  if (fnv1a64(bytes.data(), bytes.size() - 8) != h.checksum)
    throw FormatError("checkpoint: checksum mismatch");
  Reader r(bytes);
  r.str(sizeof(kCheckpointMagic));
  h.version = r.get<std::uint32_t>();
  if (h.version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(h.version));
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    TensorInfo t;
    const auto len = r.get<std::uint16_t>();
    t.name = r.str(len);
    t.rows = r.get<std::uint32_t>();
    t.cols = r.get<std::uint32_t>();
    h.tensors.push_back(std::move(t));
  }
  return h;
}

PolicyParameters decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  const CheckpointHeader h = read_checkpoint_header(bytes);
  Reader r(bytes);
  r.str(sizeof(kCheckpointMagic) + 8);
  for (const auto& t : h.tensors) r.str(2 + t.name.size() + 8);
  std::map<std::string, Eigen::MatrixXd> tensors;
  for (const auto& t : h.tensors) {
    Eigen::MatrixXd m(t.rows, t.cols);
    for (std::uint32_t i = 0; i < t.rows; ++i)
      for (std::uint32_t j = 0; j < t.cols; ++j) m(i, j) = r.get<double>();
    tensors[t.name] = std::move(m);
  }
  if (r.pos() + 8 != bytes.size()) throw FormatError("checkpoint: trailing bytes");

  PolicyParameters p;
  p.actor = rebuild_mlp(tensors, "actor");
  p.critic = rebuild_mlp(tensors, "critic");
  p.log_std = require(tensors, "log_std").col(0);
  p.obs_offset = require(tensors, "obs_offset").col(0);
  p.obs_scale = require(tensors, "obs_scale").col(0);
  p.action_scale = require(tensors, "action_scale").col(0);
  p.value_scale = require(tensors, "value_scale")(0, 0);
  if (p.actor.input_dim() != kObsDim || p.actor.output_dim() != kActDim ||
      p.critic.input_dim() != kObsDim || p.critic.output_dim() != 1 ||
      p.log_std.size() != kActDim || p.obs_offset.size() != kObsDim ||
      p.obs_scale.size() != kObsDim || p.action_scale.size() != kActDim)
    throw FormatError("checkpoint: unexpected network dimensions");
  if (!p.finite()) throw FormatError("checkpoint: non-finite weights");
  return p;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& p) {
  const auto bytes = encode_checkpoint(p);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

PolicyParameters load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

CheckpointHeader describe_checkpoint(const std::filesystem::path& path) {
  return read_checkpoint_header(read_file(path));
}

void print_checkpoint_header(std::ostream& os, const CheckpointHeader& h) {
  std::ostringstream sum;
  sum << std::hex << std::setw(16) << std::setfill('0') << h.checksum;
  os << "format: CASCPOL v" << h.version << "\n";
  os << "bytes: " << h.file_size << "\n";
  os << "checksum: " << sum.str() << "\n";
  os << "tensors: " << h.tensors.size() << "\n";
  for (const auto& t : h.tensors) os << "  " << t.name << " " << t.rows << "x" << t.cols << "\n";
}

std::string checkpoint_id(const PolicyParameters& p) {
  const auto bytes = encode_checkpoint(p);
  std::uint64_t sum;
  std::memcpy(&sum, bytes.data() + bytes.size() - 8, 8);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << sum;
  return os.str();
}

}  // namespace cascade
