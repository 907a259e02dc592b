#include "mapel/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mapel/errors.hpp"

namespace mapel {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <class T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void bytes(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void floats(const nn::Matrix<float>& m) {
    out_.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(float));
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void floats(nn::Matrix<float>& m) {
    const auto n = static_cast<std::size_t>(m.size()) * sizeof(float);
    need(n);
    std::memcpy(m.data(), in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw CorruptRecord("checkpoint is truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  Writer w;
  std::string magic(kCheckpointMagic);
  for (char ch : magic) w.put(ch);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(c.config_hash);
  w.bytes(run_text(c.run));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.epoch));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.params.size()));
  for (const auto& t : c.params) {
    w.bytes(t.name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.value.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.value.cols()));
    w.floats(t.value);
  }
  w.put<std::uint64_t>(static_cast<std::uint64_t>(c.optimizer.step));
  for (const auto& t : c.optimizer.m) w.floats(t.value);
  for (const auto& t : c.optimizer.v) w.floats(t.value);
  return w.take();
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  const std::string magic(kCheckpointMagic);
  if (bytes.size() < magic.size() + 4 || bytes.compare(0, magic.size(), magic) != 0) {
    throw CheckpointVersionMismatch("not a MAPEL1 checkpoint");
  }
  Reader r(bytes);
  for (std::size_t i = 0; i < magic.size(); ++i) r.get<char>();
  if (const auto version = r.get<std::uint32_t>(); version != kCheckpointVersion) {
    throw CheckpointVersionMismatch("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.config_hash = r.get<std::uint64_t>();
  c.run = parse_run_text(r.bytes());
  c.epoch = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.bytes();
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    r.floats(c.params.add(std::move(name), rows, cols));
  }
  c.optimizer = adam_init(c.params);
  c.optimizer.step = static_cast<long>(r.get<std::uint64_t>());
  for (auto& t : c.optimizer.m) r.floats(t.value);
  for (auto& t : c.optimizer.v) r.floats(t.value);
  if (!r.done()) throw CorruptRecord("trailing bytes after checkpoint payload");
  return c;
}

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    const auto bytes = serialize_checkpoint(checkpoint);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing checkpoint '" + path + "'");
  }
  std::rename(tmp.c_str(), path.c_str());
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace mapel
