// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "twist/errors.hpp"

namespace twist {

namespace {

constexpr char kMagic[4] = {'T', 'W', 'S', 'T'};
constexpr std::uint32_t kMaxRank = 8;

class Writer {
 public:
  std::vector<std::uint8_t> bytes;

  template <class T>
  void put(T v) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void floats(std::span<const float> v) {
    for (float f : v) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put(u);
    }
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  template <class T>
  T get() {
    static_assert(std::is_integral_v<T>);
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void floats(std::span<float> out) {
    need(out.size() * 4);
    for (float& f : out) {
      const auto u = get<std::uint32_t>();
      std::memcpy(&f, &u, 4);
    }
  }
  bool done() const { return pos_ == b_.size(); }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error(Errc::format, "truncated checkpoint");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

void put_config(Writer& w, const ModelConfig& c) {
  for (int v : {c.n_layers, c.d_model, c.n_heads, c.d_head, c.d_inner, c.ffn_blocks, c.vocab, c.context})
    w.put(static_cast<std::int32_t>(v));
  w.put(static_cast<std::uint32_t>(c.shared_layers.size()));
  for (int l : c.shared_layers) w.put(static_cast<std::int32_t>(l));
  w.put(static_cast<std::uint8_t>(c.activation));
  w.put(static_cast<std::uint8_t>(c.tie_projection));
  w.put(static_cast<std::uint8_t>(c.scale_correction));
}

ModelConfig get_config(Reader& r) {
  ModelConfig c;
  for (int* v : {&c.n_layers, &c.d_model, &c.n_heads, &c.d_head, &c.d_inner, &c.ffn_blocks, &c.vocab, &c.context})
    *v = r.get<std::int32_t>();
  const auto n_shared = r.get<std::uint32_t>();
  if (n_shared > 1u << 16) throw Error(Errc::format, "implausible shared layer count");
  c.shared_layers.resize(n_shared);
  for (auto& l : c.shared_layers) l = r.get<std::int32_t>();
  const auto act = r.get<std::uint8_t>();
  if (act > 1) throw Error(Errc::format, "unknown activation code");
  c.activation = static_cast<Activation>(act);
  c.tie_projection = r.get<std::uint8_t>() != 0;
  c.scale_correction = r.get<std::uint8_t>() != 0;
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(Errc::format, std::string("stored model config invalid: ") + e.what());
  }
  return c;
}

void put_lists(Writer& w, const std::vector<std::vector<int>>& lists) {
  for (const auto& l : lists) {
    w.put(static_cast<std::uint32_t>(l.size()));
    for (int v : l) w.put(static_cast<std::int32_t>(v));
  }
}

std::vector<std::vector<int>> get_lists(Reader& r, int n_layers) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_layers));
  for (auto& l : out) {
    const auto n = r.get<std::uint32_t>();
    if (n > 1u << 20) throw Error(Errc::format, "implausible block list length");
    l.resize(n);
    for (auto& v : l) v = r.get<std::int32_t>();
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.put(kCheckpointVersion);
  put_config(w, ckpt.config);
  w.put(static_cast<std::uint8_t>(ckpt.subnet.has_value()));
  if (ckpt.subnet) {
    const SubnetSpec& s = *ckpt.subnet;
    w.put(static_cast<std::uint8_t>(s.mode));
    w.put(static_cast<std::uint8_t>(s.scope));
    w.put(static_cast<std::uint8_t>(s.scale_correction));
    put_lists(w, s.attn_blocks);
    put_lists(w, s.ffn_blocks);
  }
  w.put(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, t] : ckpt.params) {
    w.put(static_cast<std::uint32_t>(name.size()));
    w.raw(name.data(), name.size());
    w.put(std::uint8_t{0});
    w.put(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.put(static_cast<std::uint64_t>(d));
    w.floats(t.data());
  }
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.str(4) != std::string(kMagic, 4)) throw Error(Errc::format, "not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw Error(Errc::format, "incompatible checkpoint version " + std::to_string(version) + " (expected " +
                                  std::to_string(kCheckpointVersion) + ")");
  Checkpoint ck;
  ck.config = get_config(r);
  if (r.get<std::uint8_t>()) {
    SubnetSpec s;
    const auto mode = r.get<std::uint8_t>();
    const auto scope = r.get<std::uint8_t>();
    if (mode > 1 || scope > 2) throw Error(Errc::format, "bad subnet header");
    s.mode = static_cast<SubnetMode>(mode);
    s.scope = static_cast<Scope>(scope);
    s.scale_correction = r.get<std::uint8_t>() != 0;
    s.attn_blocks = get_lists(r, ck.config.n_layers);
    s.ffn_blocks = get_lists(r, ck.config.n_layers);
    try {
      s.validate(ck.config);
    } catch (const Error& e) {
      throw Error(Errc::format, std::string("stored subnet invalid: ") + e.what());
    }
    ck.subnet = std::move(s);
  }
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = r.get<std::uint32_t>();
    std::string name = r.str(len);
    if (r.get<std::uint8_t>() != 0) throw Error(Errc::format, "unsupported dtype for '" + name + "'");
    const auto rank = r.get<std::uint32_t>();
    if (rank > kMaxRank) throw Error(Errc::format, "rank too large for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) {
      const auto v = r.get<std::uint64_t>();
      if (v > (1ull << 40)) throw Error(Errc::format, "implausible extent for '" + name + "'");
      d = static_cast<std::int64_t>(v);
    }
    if (static_cast<std::uint64_t>(shape_numel(shape)) * 4 > r.remaining())
      throw Error(Errc::format, "truncated data for '" + name + "'");
    Tensor t(shape);
    r.floats(t.data());
    if (ck.params.contains(name)) throw Error(Errc::format, "duplicate record '" + name + "'");
    ck.params.insert(name, std::move(t));
  }
  if (!r.done()) throw Error(Errc::format, "trailing bytes after checkpoint records");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::io, "write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "checkpoint not found: '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::int64_t checkpoint_payload_bytes(const Checkpoint& ckpt) { return ckpt.params.param_count() * 4; }

}  // namespace twist
