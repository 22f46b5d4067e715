#include "symm/io.hpp"

#include "symm/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace symm::io {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_num(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void byte_error(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::ParseError, "byte " + std::to_string(offset) + ": " + what);
}

// Calls fn(line_number, line) for each line, without the terminator.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
    ++line_no;
    pos = nl + 1;
  }
}

// --- OBJ -----------------------------------------------------------------------

long parse_obj_index(std::string_view tok, std::size_t n_vertices, std::size_t line) {
  const std::string_view head = tok.substr(0, tok.find('/'));
  long idx = 0;
  if (!parse_num(head, idx) || idx == 0) line_error(line, "bad face index '" + std::string(tok) + "'");
  if (idx < 0) {
    idx += static_cast<long>(n_vertices);
    if (idx < 0) line_error(line, "relative face index out of range");
    return idx;
  }
  return idx - 1;
}

// --- PLY -----------------------------------------------------------------------

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

std::optional<Scalar> scalar_type(std::string_view s) {
  if (s == "char" || s == "int8") return Scalar::I8;
  if (s == "uchar" || s == "uint8") return Scalar::U8;
  if (s == "short" || s == "int16") return Scalar::I16;
  if (s == "ushort" || s == "uint16") return Scalar::U16;
  if (s == "int" || s == "int32") return Scalar::I32;
  if (s == "uint" || s == "uint32") return Scalar::U32;
  if (s == "float" || s == "float32") return Scalar::F32;
  if (s == "double" || s == "float64") return Scalar::F64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar t) {
  switch (t) {
  case Scalar::I8:
  case Scalar::U8: return 1;
  case Scalar::I16:
  case Scalar::U16: return 2;
  case Scalar::I32:
  case Scalar::U32:
  case Scalar::F32: return 4;
  case Scalar::F64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::F32;
  bool is_list = false;
  Scalar count_type = Scalar::U8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

template <class T>
T load_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  return std::bit_cast<T>(b);
}

class BinaryReader {
public:
  BinaryReader(std::string_view data, std::size_t base) : data_(data), base_(base) {}

  double read(Scalar t) {
    const std::size_t n = scalar_size(t);
    if (pos_ + n > data_.size()) {
      byte_error(base_ + pos_, "unexpected end of binary data (need " + std::to_string(n) + " bytes, " +
                                   std::to_string(data_.size() - pos_) + " left)");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data()) + pos_;
    pos_ += n;
    switch (t) {
    case Scalar::I8: return static_cast<std::int8_t>(p[0]);
    case Scalar::U8: return p[0];
    case Scalar::I16: return load_le<std::int16_t>(p);
    case Scalar::U16: return load_le<std::uint16_t>(p);
    case Scalar::I32: return load_le<std::int32_t>(p);
    case Scalar::U32: return load_le<std::uint32_t>(p);
    case Scalar::F32: return load_le<float>(p);
    case Scalar::F64: return load_le<double>(p);
    }
    return 0.0;
  }

  std::size_t offset() const { return base_ + pos_; }

private:
  std::string_view data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

class AsciiReader {
public:
  AsciiReader(std::string_view body, std::size_t first_line) : line_no_(first_line) {
    for_each_line(body, [&](std::size_t, std::string_view line) { lines_.push_back(line); });
  }

  double read(Scalar) {
    while (tok_ >= toks_.size()) {
      if (next_ >= lines_.size()) line_error(line_no_ + next_, "unexpected end of data");
      toks_ = split_ws(lines_[next_]);
      cur_line_ = line_no_ + next_;
      ++next_;
      tok_ = 0;
    }
    double v = 0.0;
    const std::string_view t = toks_[tok_++];
    if (!parse_num(t, v)) line_error(cur_line_, "bad number '" + std::string(t) + "'");
    return v;
  }

private:
  std::vector<std::string_view> lines_;
  std::size_t line_no_;
  std::size_t next_ = 0;
  std::size_t cur_line_ = 0;
  std::vector<std::string_view> toks_;
  std::size_t tok_ = 0;
};

template <class Reader>
TriMesh read_ply_body(Reader& r, const std::vector<Element>& elements) {
  TriMesh mesh;
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    int ix = -1, iy = -1, iz = -1, iface = -1;
    for (std::size_t k = 0; k < e.props.size(); ++k) {
      const auto& p = e.props[k];
      if (is_vertex && !p.is_list) {
        if (p.name == "x") ix = static_cast<int>(k);
        if (p.name == "y") iy = static_cast<int>(k);
        if (p.name == "z") iz = static_cast<int>(k);
      }
      if (is_face && p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) iface = static_cast<int>(k);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      throw Error(ErrorCode::ParseError, "vertex element lacks x, y, z properties");
    }
    std::vector<std::uint32_t> poly;
    for (std::size_t i = 0; i < e.count; ++i) {
      Vec3 v = Vec3::Zero();
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        const auto& p = e.props[k];
        if (p.is_list) {
          const double n = r.read(p.count_type);
          if (n < 0 || n != std::floor(n)) throw Error(ErrorCode::ParseError, "bad list length");
          poly.clear();
          for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            const double idx = r.read(p.type);
            if (static_cast<int>(k) == iface) {
              if (idx < 0 || idx != std::floor(idx)) throw Error(ErrorCode::ParseError, "bad face index");
              poly.push_back(static_cast<std::uint32_t>(idx));
            }
          }
          if (static_cast<int>(k) == iface) {
            if (poly.size() < 3) throw Error(ErrorCode::ParseError, "face with fewer than 3 vertices");
            for (std::size_t j = 1; j + 1 < poly.size(); ++j) mesh.faces.push_back({poly[0], poly[j], poly[j + 1]});
          }
        } else {
          const double val = r.read(p.type);
          if (static_cast<int>(k) == ix) v.x() = val;
          if (static_cast<int>(k) == iy) v.y() = val;
          if (static_cast<int>(k) == iz) v.z() = val;
        }
      }
      if (is_vertex) mesh.vertices.push_back(v);
    }
  }
  for (const auto& f : mesh.faces) {
    for (auto idx : f) {
      if (idx >= mesh.vertices.size()) {
        throw Error(ErrorCode::ParseError, "face index " + std::to_string(idx) + " out of range");
      }
    }
  }
  return mesh;
}

} // namespace

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::vector<std::pair<std::size_t, std::array<long, 3>>> pending;  // line, face
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) return;
    if (tok[0] == "v") {
      if (tok.size() < 4) line_error(line_no, "vertex needs 3 coordinates");
      Vec3 v;
      for (int k = 0; k < 3; ++k) {
        if (!parse_num(tok[k + 1], v[k])) line_error(line_no, "bad coordinate '" + std::string(tok[k + 1]) + "'");
      }
      mesh.vertices.push_back(v);
    } else if (tok[0] == "f") {
      if (tok.size() < 4) line_error(line_no, "face needs at least 3 vertices");
      std::vector<long> idx;
      for (std::size_t k = 1; k < tok.size(); ++k) idx.push_back(parse_obj_index(tok[k], mesh.vertices.size(), line_no));
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) pending.push_back({line_no, {idx[0], idx[k], idx[k + 1]}});
    }
  });
  for (const auto& [line_no, f] : pending) {
    for (long i : f) {
      if (i >= static_cast<long>(mesh.vertices.size())) line_error(line_no, "face index out of range");
    }
    mesh.faces.push_back({static_cast<std::uint32_t>(f[0]), static_cast<std::uint32_t>(f[1]),
                          static_cast<std::uint32_t>(f[2])});
  }
  return mesh;
}

TriMesh parse_ply(std::string_view bytes) {
  std::vector<Element> elements;
  std::string format;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool ended = false;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = std::min(nl + 1, bytes.size());
    ++line_no;
    const auto tok = split_ws(line);
    if (line_no == 1) {
      if (tok.size() != 1 || tok[0] != "ply") line_error(1, "missing 'ply' magic");
      continue;
    }
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") {
      ended = true;
      break;
    }
    if (tok[0] == "format") {
      if (tok.size() < 2) line_error(line_no, "bad format line");
      format = std::string(tok[1]);
      if (format == "binary_big_endian") {
        throw Error(ErrorCode::UnsupportedFormat, "binary_big_endian PLY is not supported");
      }
      if (format != "ascii" && format != "binary_little_endian") {
        throw Error(ErrorCode::UnsupportedFormat, "unknown PLY format '" + format + "'");
      }
    } else if (tok[0] == "element") {
      std::size_t n = 0;
      if (tok.size() != 3 || !parse_num(tok[2], n)) line_error(line_no, "bad element line");
      elements.push_back({std::string(tok[1]), n, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) line_error(line_no, "property before any element");
      Property p;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = scalar_type(tok[2]);
        auto it = scalar_type(tok[3]);
        if (!ct || !it) line_error(line_no, "unknown list property type");
        p = {std::string(tok[4]), *it, true, *ct};
      } else if (tok.size() == 3) {
        auto t = scalar_type(tok[1]);
        if (!t) line_error(line_no, "unknown property type '" + std::string(tok[1]) + "'");
        p = {std::string(tok[2]), *t, false, Scalar::U8};
      } else {
        line_error(line_no, "bad property line");
      }
      elements.back().props.push_back(p);
    } else {
      line_error(line_no, "unexpected header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!ended) throw Error(ErrorCode::ParseError, "PLY header has no end_header");
  if (format.empty()) throw Error(ErrorCode::ParseError, "PLY header has no format line");

  if (format == "ascii") {
    AsciiReader r(bytes.substr(pos), line_no + 1);
    return read_ply_body(r, elements);
  }
  BinaryReader r(bytes.substr(pos), pos);
  return read_ply_body(r, elements);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

TriMesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext != ".obj" && ext != ".ply") {
    throw Error(ErrorCode::UnsupportedFormat, "unsupported mesh extension '" + ext + "'");
  }
  const std::string data = read_file(path);
  try {
    return ext == ".obj" ? parse_obj(data) : parse_ply(data);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

PointCloud load_cloud(const std::filesystem::path& path) {
  return PointCloud{load_mesh(path).vertices};
}

std::string format_ply(const PointCloud& cloud) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  out.reserve(out.size() + cloud.size() * 24);
  for (const Vec3& p : cloud.points) {
    for (int k = 0; k < 3; ++k) {
      auto b = std::bit_cast<std::array<char, 8>>(p[k]);
      if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
      out.append(b.data(), b.size());
    }
  }
  return out;
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud) { write_file(path, format_ply(cloud)); }

} // namespace symm::io
