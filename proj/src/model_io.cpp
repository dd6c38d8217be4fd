// Model file layout (all integers decimal in the text header):
//
//   ADDML-MODEL\n
//   version <u32>\n
//   dims <d>,<v1>,...,<w>\n
//   mode center|dissimilarity\n
//   prng <name>\n
//   normalizer 0|1\n
//   retrieval_rows <n>\n
//   config <key=value;...>\n
//   payload_doubles <count>\n
//   end\n
//   <count little-endian IEEE-754 doubles>
//   <u32 little-endian crc32 of every preceding byte>
//
// Payload order: per layer W (row-major) then b; mu; normalizer mean and
// stddev when present; retrieval latents row-major when present.

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "addml/data_io.hpp"

namespace addml {
namespace {

constexpr std::string_view kMagic = "ADDML-MODEL\n";

std::uint32_t crc_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n));
  return static_cast<std::uint32_t>(crc);
}

void put_double(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.append(buf, 8);
}

double get_double(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

std::size_t parse_size(std::string_view text, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(std::string("malformed ") + what + " in model header");
  }
  return v;
}

// Sequential reader over the header lines.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view field(std::string_view key) {
    const std::size_t nl = bytes_.find('\n', pos_);
    if (nl == std::string_view::npos) throw FormatError("model header truncated");
    std::string_view line = bytes_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    if (line.substr(0, key.size()) != key ||
        (line.size() > key.size() && line[key.size()] != ' ')) {
      throw FormatError("expected '" + std::string(key) + "' in model header");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string_view{};
  }
  std::size_t position() const noexcept { return pos_; }
  void skip(std::size_t n) noexcept { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Scorer ModelArtifact::scorer() const { return Scorer(net, mu, retrieval, mode); }

std::string serialize_model(const ModelArtifact& a) {
  if (a.mu.size() != a.net.output_dim()) throw ShapeError("artifact center does not match network");
  std::ostringstream header;
  header << kMagic << "version " << a.version << '\n' << "dims ";
  const auto dims = a.net.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) header << (i ? "," : "") << dims[i];
  header << '\n'
         << "mode " << to_string(a.mode) << '\n'
         << "prng " << a.prng << '\n'
         << "normalizer " << (a.normalizer ? 1 : 0) << '\n'
         << "retrieval_rows " << (a.retrieval ? a.retrieval->rows() : 0) << '\n'
         << "config " << a.config_snapshot << '\n';

  std::string payload;
  for (const auto& layer : a.net.layers()) {
    for (double v : layer.weight.data()) put_double(payload, v);
    for (double v : layer.bias) put_double(payload, v);
  }
  for (double v : a.mu) put_double(payload, v);
  if (a.normalizer) {
    if (a.normalizer->mean.size() != a.net.input_dim() || a.normalizer->stddev.size() != a.net.input_dim()) {
      throw ShapeError("artifact normalizer does not match network input");
    }
    for (double v : a.normalizer->mean) put_double(payload, v);
    for (double v : a.normalizer->stddev) put_double(payload, v);
  }
  if (a.retrieval) {
    for (double v : a.retrieval->data()) put_double(payload, v);
  }
  header << "payload_doubles " << payload.size() / 8 << '\n' << "end\n";

  std::string out = header.str();
  out += payload;
  put_u32(out, crc_of(out.data(), out.size()));
  return out;
}

ModelArtifact deserialize_model(const std::string& bytes) {
  if (bytes.size() < kMagic.size() || std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a model file (bad magic)");
  }
  HeaderReader reader(std::string_view(bytes).substr(0, bytes.size()));
  reader.skip(kMagic.size());
  const auto version = static_cast<std::uint32_t>(parse_size(reader.field("version"), "version"));
  if (version != ModelArtifact::kFormatVersion) {
    throw FormatError("model format version " + std::to_string(version) + " is not supported (expected version " +
                      std::to_string(ModelArtifact::kFormatVersion) + ")");
  }
  if (bytes.size() < kMagic.size() + 4) throw FormatError("model file truncated");
  const std::size_t body = bytes.size() - 4;
  const std::uint32_t stored = get_u32(bytes.data() + body);
  if (crc_of(bytes.data(), body) != stored) {
    throw FormatError("model checksum mismatch (file corrupted or truncated)");
  }

  ModelArtifact a;
  a.version = version;
  a.checksum = stored;
  std::vector<std::size_t> dims;
  {
    const std::string_view text = reader.field("dims");
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = text.find(',', start);
      dims.push_back(parse_size(text.substr(start, comma - start), "dims"));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  if (dims.size() < 2) throw FormatError("model header lists fewer than two dimensions");
  a.mode = parse_score_mode(reader.field("mode"));
  a.prng = std::string(reader.field("prng"));
  const std::size_t has_normalizer = parse_size(reader.field("normalizer"), "normalizer flag");
  const std::size_t retrieval_rows = parse_size(reader.field("retrieval_rows"), "retrieval_rows");
  a.config_snapshot = std::string(reader.field("config"));
  const std::size_t count = parse_size(reader.field("payload_doubles"), "payload_doubles");
  reader.field("end");

  const std::size_t d = dims.front();
  const std::size_t w = dims.back();
  std::size_t expected = w + (has_normalizer ? 2 * d : 0) + retrieval_rows * w;
  for (std::size_t c = 1; c < dims.size(); ++c) expected += dims[c] * dims[c - 1] + dims[c];
  if (count != expected) throw FormatError("payload size disagrees with header dimensions");
  if (reader.position() + 8 * count != body) throw FormatError("model payload truncated");

  const char* p = bytes.data() + reader.position();
  auto take = [&p]() {
    const double v = get_double(p);
    p += 8;
    return v;
  };
  std::vector<DenseLayer> layers;
  for (std::size_t c = 1; c < dims.size(); ++c) {
    DenseLayer layer{Matrix(dims[c], dims[c - 1]), Vector(dims[c])};
    for (double& v : layer.weight.data()) v = take();
    for (double& v : layer.bias) v = take();
    layers.push_back(std::move(layer));
  }
  try {
    a.net = MetricNet(std::move(layers));
  } catch (const InvalidArchitecture& e) {
    throw FormatError(std::string("invalid architecture in model file: ") + e.what());
  }
  a.mu.resize(w);
  for (double& v : a.mu) v = take();
  if (has_normalizer) {
    Normalizer n{Vector(d), Vector(d)};
    for (double& v : n.mean) v = take();
    for (double& v : n.stddev) v = take();
    a.normalizer = std::move(n);
  }
  if (retrieval_rows > 0) {
    Matrix r(retrieval_rows, w);
    for (double& v : r.data()) v = take();
    a.retrieval = std::move(r);
  }
  if (a.mode == ScoreMode::dissimilarity && !a.retrieval) {
    throw FormatError("dissimilarity-mode model without retrieval set");
  }
  return a;
}

void save_model(const ModelArtifact& artifact, const std::string& path) {
  write_file_atomic(path, serialize_model(artifact));
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace addml
