#include "trunk/io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "trunk/errors.h"

namespace trunk {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

using Json = nlohmann::ordered_json;

std::string LineLoc(const std::string& source, int line) {
  return source + ":line " + std::to_string(line);
}

[[noreturn]] void ParseFail(const std::string& message, const std::string& where) {
  throw Error(ErrorCategory::kParse, message, where);
}

[[noreturn]] void ValidationFail(const std::string& message, const std::string& where) {
  throw Error(ErrorCategory::kValidation, message, where);
}

const Json& Field(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) ParseFail(std::string("missing field \"") + key + "\"", where);
  return *it;
}

double Number(const Json& v, const std::string& what, const std::string& where) {
  if (!v.is_number()) ParseFail(what + " must be a number", where);
  return v.get<double>();
}

std::string String(const Json& v, const std::string& what, const std::string& where) {
  if (!v.is_string()) ParseFail(what + " must be a string", where);
  return v.get<std::string>();
}

Eigen::AlignedBox2d Box(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) ParseFail("bbox must be [x1, y1, x2, y2]", where);
  const double x1 = Number(v[0], "bbox", where);
  const double y1 = Number(v[1], "bbox", where);
  const double x2 = Number(v[2], "bbox", where);
  const double y2 = Number(v[3], "bbox", where);
  if (!(x1 < x2) || !(y1 < y2)) ValidationFail("bbox needs x1 < x2 and y1 < y2", where);
  Eigen::AlignedBox2d box;
  box.min() = Eigen::Vector2d(x1, y1);
  box.max() = Eigen::Vector2d(x2, y2);
  return box;
}

Eigen::Matrix2Xd Points(const Json& v, const std::string& what, const std::string& where) {
  if (!v.is_array()) ParseFail(what + " must be an array of [x, y] pairs", where);
  Eigen::Matrix2Xd pts(2, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Json& p = v[i];
    if (!p.is_array() || p.size() != 2) ParseFail(what + " entries must be [x, y]", where);
    pts(0, static_cast<Eigen::Index>(i)) = Number(p[0], what, where);
    pts(1, static_cast<Eigen::Index>(i)) = Number(p[1], what, where);
  }
  if (!pts.allFinite()) ValidationFail(what + " must be finite", where);
  return pts;
}

Json BoxJson(const Eigen::AlignedBox2d& box) {
  return Json::array({box.min().x(), box.min().y(), box.max().x(), box.max().y()});
}

Json PointsJson(const Eigen::Matrix2Xd& pts) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < pts.cols(); ++i) out.push_back(Json::array({pts(0, i), pts(1, i)}));
  return out;
}

// Calls parse_line(json, where) for every non-blank line.
template <typename Record, typename ParseLine>
std::vector<Record> ParseLines(std::istream& in, const std::string& source, ParseLine parse_line) {
  std::vector<Record> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = LineLoc(source, number);
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      ParseFail(std::string("malformed record: ") + e.what(), where);
    }
    if (!obj.is_object()) ParseFail("record must be an object", where);
    out.push_back(parse_line(obj, where));
  }
  if (in.bad()) throw Error(ErrorCategory::kIo, "read failed", source);
  return out;
}

std::ifstream OpenIn(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open for reading", path.string());
  return in;
}

template <typename Record, typename Format>
void WriteLines(const std::vector<Record>& records, const std::filesystem::path& path,
                Format format) {
  std::string bytes;
  for (const auto& r : records) bytes += format(r) + '\n';
  WriteFileBytes(path, bytes);
}

void AppendFloats(std::string& out, const float* data, std::size_t count) {
  const auto offset = out.size();
  out.resize(offset + count * sizeof(float));
  std::memcpy(out.data() + offset, data, count * sizeof(float));
}

std::uint32_t ReadU32(std::string_view bytes, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + at, sizeof(v));
  return v;
}

DepthMap DecodeRaster(std::string_view payload, int width, int height, std::size_t payload_offset,
                      bool bottom_up, bool big_endian, const std::string& source) {
  const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4;
  if (payload.size() < expected) {
    ParseFail("truncated raster: " + std::to_string(payload.size()) + " of " +
                  std::to_string(expected) + " payload bytes",
              source + ":byte " + std::to_string(payload_offset + payload.size()));
  }
  if (payload.size() > expected) {
    ParseFail("dimension mismatch: " + std::to_string(payload.size() - expected) +
                  " trailing bytes after a " + std::to_string(width) + "x" +
                  std::to_string(height) + " raster",
              source + ":byte " + std::to_string(payload_offset + expected));
  }
  DepthMap::Raster raster(height, width);
  for (int row = 0; row < height; ++row) {
    const int y = bottom_up ? height - 1 - row : row;
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits = ReadU32(payload, (static_cast<std::size_t>(row) * width + x) * 4);
      if (big_endian) bits = __builtin_bswap32(bits);
      raster(y, x) = std::bit_cast<float>(bits);
    }
  }
  return DepthMap(std::move(raster));
}

// Reads a whitespace-delimited header token starting at `pos`.
std::string_view HeaderToken(std::string_view bytes, std::size_t& pos, const std::string& source) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) ParseFail("truncated PFM header", source + ":byte " + std::to_string(pos));
  return bytes.substr(start, pos - start);
}

template <typename T>
T ParseNumber(std::string_view text, const std::string& what, const std::string& where) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    ParseFail("bad " + what + " '" + std::string(text) + "'", where);
  }
  return value;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCategory::kIo, "read failed", path.string());
  return ss.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open for writing", path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCategory::kIo, "write failed", path.string());
}

// ---- annotations ---------------------------------------------------------

std::vector<AnnotationRecord> ParseAnnotations(std::istream& in, const std::string& source) {
  return ParseLines<AnnotationRecord>(in, source, [](const Json& obj, const std::string& where) {
    AnnotationRecord r;
    r.image_id = String(Field(obj, "image_id", where), "image_id", where);
    r.bbox = Box(Field(obj, "bbox", where), where);
    r.keypoints = Points(Field(obj, "keypoints", where), "keypoints", where);
    if (r.keypoints.cols() < 2) ValidationFail("need at least 2 keypoints", where);
    return r;
  });
}

std::vector<AnnotationRecord> ParseAnnotations(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ParseAnnotations(in, path.string());
}

std::string FormatAnnotation(const AnnotationRecord& r) {
  Json obj;
  obj["image_id"] = r.image_id;
  obj["bbox"] = BoxJson(r.bbox);
  obj["keypoints"] = PointsJson(r.keypoints);
  return obj.dump();
}

void WriteAnnotations(const std::vector<AnnotationRecord>& records,
                      const std::filesystem::path& path) {
  WriteLines(records, path, FormatAnnotation);
}

// ---- predictions ---------------------------------------------------------

std::vector<PredictionRecord> ParsePredictions(std::istream& in, const std::string& source) {
  return ParseLines<PredictionRecord>(in, source, [](const Json& obj, const std::string& where) {
    PredictionRecord r;
    r.image_id = String(Field(obj, "image_id", where), "image_id", where);
    r.confidence = Number(Field(obj, "confidence", where), "confidence", where);
    if (!(r.confidence >= 0 && r.confidence <= 1)) {
      ValidationFail("confidence outside [0, 1]", where);
    }
    r.bbox = Box(Field(obj, "bbox", where), where);
    r.control_points = Points(Field(obj, "control_points", where), "control_points", where);
    if (r.control_points.cols() != kPredictionControlPoints) {
      ValidationFail("prediction needs exactly 5 control points, got " +
                         std::to_string(r.control_points.cols()),
                     where);
    }
    return r;
  });
}

std::vector<PredictionRecord> ParsePredictions(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ParsePredictions(in, path.string());
}

std::string FormatPrediction(const PredictionRecord& r) {
  Json obj;
  obj["image_id"] = r.image_id;
  obj["confidence"] = r.confidence;
  obj["bbox"] = BoxJson(r.bbox);
  obj["control_points"] = PointsJson(r.control_points);
  return obj.dump();
}

void WritePredictions(const std::vector<PredictionRecord>& records,
                      const std::filesystem::path& path) {
  WriteLines(records, path, FormatPrediction);
}

// ---- curves --------------------------------------------------------------

std::vector<CurveRecord> ParseCurves(std::istream& in, const std::string& source) {
  return ParseLines<CurveRecord>(in, source, [](const Json& obj, const std::string& where) {
    CurveRecord r;
    r.image_id = String(Field(obj, "image_id", where), "image_id", where);
    r.bbox = Box(Field(obj, "bbox", where), where);
    r.control_points = Points(Field(obj, "control_points", where), "control_points", where);
    if (r.control_points.cols() < 1 || r.control_points.cols() > kMaxDegree + 1) {
      ValidationFail("control point count outside [1, 21]", where);
    }
    if (const auto it = obj.find("confidence"); it != obj.end()) {
      r.confidence = Number(*it, "confidence", where);
      if (!(*r.confidence >= 0 && *r.confidence <= 1)) {
        ValidationFail("confidence outside [0, 1]", where);
      }
    }
    if (const auto it = obj.find("residual_rms"); it != obj.end()) {
      r.residual_rms = Number(*it, "residual_rms", where);
    }
    if (const auto it = obj.find("parameterization"); it != obj.end()) {
      r.parameterization = String(*it, "parameterization", where);
    }
    return r;
  });
}

std::vector<CurveRecord> ParseCurves(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ParseCurves(in, path.string());
}

std::string FormatCurve(const CurveRecord& r) {
  Json obj;
  obj["image_id"] = r.image_id;
  if (r.confidence) obj["confidence"] = *r.confidence;
  obj["bbox"] = BoxJson(r.bbox);
  obj["control_points"] = PointsJson(r.control_points);
  if (r.residual_rms) obj["residual_rms"] = *r.residual_rms;
  if (r.parameterization) obj["parameterization"] = *r.parameterization;
  return obj.dump();
}

void WriteCurves(const std::vector<CurveRecord>& records, const std::filesystem::path& path) {
  WriteLines(records, path, FormatCurve);
}

// ---- depth ---------------------------------------------------------------

DepthMap DecodeDepth(std::string_view bytes, const std::string& source) {
  // A raw header cannot start with "Pf" + whitespace: its width would exceed
  // the raw size limit.
  if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == 'f' || bytes[1] == 'F') &&
      std::isspace(static_cast<unsigned char>(bytes[2]))) {
    if (bytes[1] == 'F') {
      ParseFail("colour PFM not supported, expected single-channel \"Pf\"", source + ":byte 0");
    }
    std::size_t pos = 2;
    const std::string width_at = source + ":byte " + std::to_string(pos);
    const int width = ParseNumber<int>(HeaderToken(bytes, pos, source), "width", width_at);
    const std::string height_at = source + ":byte " + std::to_string(pos);
    const int height = ParseNumber<int>(HeaderToken(bytes, pos, source), "height", height_at);
    const std::string scale_at = source + ":byte " + std::to_string(pos);
    const double scale = ParseNumber<double>(HeaderToken(bytes, pos, source), "scale", scale_at);
    if (width <= 0 || height <= 0) ParseFail("nonpositive PFM dimensions", width_at);
    if (scale == 0 || !std::isfinite(scale)) ParseFail("PFM scale must be nonzero", scale_at);
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ParseFail("truncated PFM header", source + ":byte " + std::to_string(pos));
    }
    ++pos;
    return DecodeRaster(bytes.substr(pos), width, height, pos, true, scale > 0, source);
  }
  if (bytes.size() < 8) {
    ParseFail("truncated raw depth header", source + ":byte " + std::to_string(bytes.size()));
  }
  const std::uint32_t width = ReadU32(bytes, 0);
  const std::uint32_t height = ReadU32(bytes, 4);
  if (width == 0 || height == 0 || width > (1u << 16) || height > (1u << 16)) {
    ParseFail("implausible raw depth dimensions " + std::to_string(width) + "x" +
                  std::to_string(height),
              source + ":byte 0");
  }
  return DecodeRaster(bytes.substr(8), static_cast<int>(width), static_cast<int>(height), 8, false,
                      false, source);
}

DepthMap ParseDepth(const std::filesystem::path& path) {
  return DecodeDepth(ReadFileBytes(path), path.string());
}

std::string EncodePfm(const DepthMap& map) {
  std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n-1.0\n";
  for (int y = map.height() - 1; y >= 0; --y) {
    AppendFloats(out, map.values().row(y).data(), static_cast<std::size_t>(map.width()));
  }
  return out;
}

std::string EncodeRawDepth(const DepthMap& map) {
  std::string out(8, '\0');
  const auto w = static_cast<std::uint32_t>(map.width());
  const auto h = static_cast<std::uint32_t>(map.height());
  std::memcpy(out.data(), &w, 4);
  std::memcpy(out.data() + 4, &h, 4);
  AppendFloats(out, map.values().data(), static_cast<std::size_t>(map.values().size()));
  return out;
}

void WritePfm(const DepthMap& map, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodePfm(map));
}

void WriteRawDepth(const DepthMap& map, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeRawDepth(map));
}

// ---- intrinsics ----------------------------------------------------------

CameraIntrinsics ParseIntrinsics(std::istream& in, const std::string& source) {
  static const char* const kKeys[] = {"fx", "fy", "cx", "cy", "width", "height"};
  std::map<std::string, std::pair<std::string, int>> values;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = LineLoc(source, number);
    const auto eq = line.find('=');
    if (eq == std::string::npos) ParseFail("expected key = value", where);
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      ParseFail("unknown key \"" + key + "\"", where);
    }
    if (values.count(key)) ParseFail("duplicate key \"" + key + "\"", where);
    values[key] = {value, number};
  }
  for (const char* key : kKeys) {
    if (!values.count(key)) ParseFail(std::string("missing key \"") + key + "\"", source + ":" + key);
  }
  const auto real = [&](const char* key) {
    const auto& [text, line_no] = values[key];
    return ParseNumber<double>(text, key, LineLoc(source, line_no));
  };
  const auto integer = [&](const char* key) {
    const auto& [text, line_no] = values[key];
    return ParseNumber<int>(text, key, LineLoc(source, line_no));
  };
  CameraIntrinsics camera{real("fx"), real("fy"), real("cx"), real("cy"), integer("width"),
                          integer("height")};
  try {
    camera.Validate();
  } catch (const Error& e) {
    const auto it = values.find(e.location());
    const std::string where =
        it != values.end() ? LineLoc(source, it->second.second) : source;
    throw Error(ErrorCategory::kValidation, e.detail() + " (" + e.location() + ")", where);
  }
  return camera;
}

CameraIntrinsics ParseIntrinsics(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ParseIntrinsics(in, path.string());
}

std::string FormatIntrinsics(const CameraIntrinsics& c) {
  return "fx = " + Num(c.fx) + "\nfy = " + Num(c.fy) + "\ncx = " + Num(c.cx) + "\ncy = " +
         Num(c.cy) + "\nwidth = " + std::to_string(c.width) + "\nheight = " +
         std::to_string(c.height) + "\n";
}

void WriteIntrinsics(const CameraIntrinsics& camera, const std::filesystem::path& path) {
  WriteFileBytes(path, FormatIntrinsics(camera));
}

std::vector<double> ParseErrors(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  std::vector<double> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const double v = ParseNumber<double>(line, "error value", LineLoc(path.string(), number));
    if (!std::isfinite(v)) ParseFail("non-finite error value", LineLoc(path.string(), number));
    out.push_back(v);
  }
  return out;
}

}  // namespace trunk
