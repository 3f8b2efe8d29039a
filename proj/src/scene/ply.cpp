#include "dollhouse/scene/ply.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<Scalar> parse_scalar(const std::string& name) {
  if (name == "char" || name == "int8") return Scalar::i8;
  if (name == "uchar" || name == "uint8") return Scalar::u8;
  if (name == "short" || name == "int16") return Scalar::i16;
  if (name == "ushort" || name == "uint16") return Scalar::u16;
  if (name == "int" || name == "int32") return Scalar::i32;
  if (name == "uint" || name == "uint32") return Scalar::u32;
  if (name == "float" || name == "float32") return Scalar::f32;
  if (name == "double" || name == "float64") return Scalar::f64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::i8:
    case Scalar::u8: return 1;
    case Scalar::i16:
    case Scalar::u16: return 2;
    case Scalar::i32:
    case Scalar::u32:
    case Scalar::f32: return 4;
    case Scalar::f64: return 8;
  }
  return 0;
}

template <typename T>
double read_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double read_scalar(Scalar s, const char* p) {
  switch (s) {
    case Scalar::i8: return read_as<std::int8_t>(p);
    case Scalar::u8: return read_as<std::uint8_t>(p);
    case Scalar::i16: return read_as<std::int16_t>(p);
    case Scalar::u16: return read_as<std::uint16_t>(p);
    case Scalar::i32: return read_as<std::int32_t>(p);
    case Scalar::u32: return read_as<std::uint32_t>(p);
    case Scalar::f32: return read_as<float>(p);
    case Scalar::f64: return read_as<double>(p);
  }
  return 0.0;
}

bool is_integer(Scalar s) { return s != Scalar::f32 && s != Scalar::f64; }

struct Property {
  std::string name;
  Scalar type;
};

struct Header {
  bool binary = false;
  std::size_t vertex_count = 0;
  std::vector<Property> props;
  std::size_t body_offset = 0;
};

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

Header parse_header(const std::string& bytes) {
  Header h;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string> {
    if (pos >= bytes.size()) return std::nullopt;
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) return std::nullopt;
    std::string line = strip_cr(bytes.substr(pos, nl - pos));
    pos = nl + 1;
    return line;
  };

  auto first = next_line();
  if (!first || *first != "ply") throw Error(ErrorKind::malformed_file, "missing 'ply' magic");

  bool have_format = false;
  bool in_vertex = false;
  bool seen_vertex = false;
  while (true) {
    auto line = next_line();
    if (!line) throw Error(ErrorKind::malformed_file, "header has no end_header");
    std::istringstream ls(*line);
    std::string key;
    ls >> key;
    if (key.empty() || key == "comment" || key == "obj_info") continue;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        h.binary = false;
      } else if (fmt == "binary_little_endian") {
        h.binary = true;
      } else {
        throw Error(ErrorKind::unsupported_format, "format '" + fmt + "'");
      }
      have_format = true;
    } else if (key == "element") {
      std::string name;
      long long count = -1;
      ls >> name >> count;
      if (!ls || count < 0) throw Error(ErrorKind::malformed_file, "bad element line: " + *line);
      if (name == "vertex") {
        if (seen_vertex) throw Error(ErrorKind::malformed_file, "duplicate vertex element");
        h.vertex_count = static_cast<std::size_t>(count);
        in_vertex = true;
        seen_vertex = true;
      } else {
        if (!seen_vertex && count > 0) {
          throw Error(ErrorKind::unsupported_format, "element '" + name + "' precedes vertex");
        }
        in_vertex = false;
      }
    } else if (key == "property") {
      std::string type, name;
      ls >> type;
      if (type == "list") {
        if (in_vertex) throw Error(ErrorKind::unsupported_format, "list property on vertex");
        continue;
      }
      ls >> name;
      if (!in_vertex) continue;
      const auto scalar = parse_scalar(type);
      if (!scalar || name.empty()) throw Error(ErrorKind::malformed_file, "bad property line: " + *line);
      h.props.push_back({name, *scalar});
    } else {
      throw Error(ErrorKind::malformed_file, "unknown header keyword '" + key + "'");
    }
  }
  if (!have_format) throw Error(ErrorKind::malformed_file, "missing format line");
  if (!seen_vertex) throw Error(ErrorKind::malformed_file, "missing vertex element");
  h.body_offset = pos;
  return h;
}

}  // namespace

PointCloud parse_ply(const std::string& bytes) {
  const Header h = parse_header(bytes);

  int ix = -1, iy = -1, iz = -1, ilabel = -1;
  for (std::size_t i = 0; i < h.props.size(); ++i) {
    const auto& name = h.props[i].name;
    if (name == "x") ix = static_cast<int>(i);
    if (name == "y") iy = static_cast<int>(i);
    if (name == "z") iz = static_cast<int>(i);
    if (name == "label" && is_integer(h.props[i].type)) ilabel = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorKind::unsupported_format, "vertex lacks x/y/z");

  PointCloud cloud;
  cloud.points.resize(h.vertex_count);
  if (ilabel >= 0) cloud.labels.resize(h.vertex_count);
  std::vector<double> row(h.props.size());

  if (h.binary) {
    std::vector<std::size_t> offsets;
    std::size_t stride = 0;
    for (const auto& p : h.props) {
      offsets.push_back(stride);
      stride += scalar_size(p.type);
    }
    const std::size_t available = bytes.size() - h.body_offset;
    if (available < stride * h.vertex_count) {
      throw Error(ErrorKind::malformed_file, "binary body shorter than declared vertex count");
    }
    const char* base = bytes.data() + h.body_offset;
    for (std::size_t v = 0; v < h.vertex_count; ++v) {
      const char* rec = base + v * stride;
      for (std::size_t i = 0; i < h.props.size(); ++i) row[i] = read_scalar(h.props[i].type, rec + offsets[i]);
      cloud.points[v] = Vec3(row[ix], row[iy], row[iz]);
      if (ilabel >= 0) cloud.labels[v] = static_cast<int>(row[ilabel]);
    }
  } else {
    std::istringstream body(bytes.substr(h.body_offset));
    body.imbue(std::locale::classic());
    for (std::size_t v = 0; v < h.vertex_count; ++v) {
      for (std::size_t i = 0; i < h.props.size(); ++i) {
        if (!(body >> row[i])) {
          throw Error(ErrorKind::malformed_file, "vertex " + std::to_string(v) + " of " +
                                                     std::to_string(h.vertex_count) + " missing");
        }
      }
      cloud.points[v] = Vec3(row[ix], row[iy], row[iz]);
      if (ilabel >= 0) cloud.labels[v] = static_cast<int>(row[ilabel]);
    }
  }
  for (const auto& p : cloud.points) {
    if (!p.allFinite()) throw Error(ErrorKind::malformed_file, "non-finite vertex coordinate");
  }
  return cloud;
}

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_ply(bytes);
}

std::string serialize_ply(const PointCloud& cloud, bool binary) {
  cloud.validate();
  const bool labeled = cloud.has_labels();
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "ply\n"
      << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (labeled) out << "property int label\n";
  out << "end_header\n";
  if (binary) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      for (int k = 0; k < 3; ++k) out.write(reinterpret_cast<const char*>(&p[k]), sizeof(double));
      if (labeled) {
        const std::int32_t label = cloud.labels[i];
        out.write(reinterpret_cast<const char*>(&label), sizeof(label));
      }
    }
  } else {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      out << p.x() << ' ' << p.y() << ' ' << p.z();
      if (labeled) out << ' ' << cloud.labels[i];
      out << '\n';
    }
  }
  return out.str();
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, bool binary) {
  const std::string bytes = serialize_ply(cloud, binary);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io_failure, "short write to " + path.string());
}

}  // namespace dollhouse
