#pragma once

// Dataset file formats.
//
// Annotation, prediction and curve files are JSON Lines: one object per line,
// blank lines ignored.
//
//   annotation: {"image_id":"img_001","bbox":[x1,y1,x2,y2],"keypoints":[[x,y],...]}
//   prediction: {"image_id":"img_001","confidence":0.93,"bbox":[x1,y1,x2,y2],
//                "control_points":[[x,y] x 5]}
//   curve:      {"image_id":..,"bbox":..,"control_points":[[x,y],...],
//                optional "confidence", "residual_rms", "parameterization"}
//
// Boxes are pixel corner pairs with x1 < x2 and y1 < y2. Keypoints run head to
// tail.
//
// Depth rasters are float32 metres, either PFM ("Pf", one channel, rows stored
// bottom to top, negative scale = little endian) or raw: uint32 width, uint32
// height (little endian) followed by width*height little-endian float32 in
// row-major order, top row first. Non-finite or nonpositive values are holes.
//
// Intrinsics are "key = value" lines for fx, fy, cx, cy, width, height; '#'
// starts a comment.

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "trunk/bezier.h"
#include "trunk/measure3d.h"

namespace trunk {

struct AnnotationRecord {
  std::string image_id;
  Eigen::AlignedBox2d bbox;
  Eigen::Matrix2Xd keypoints;

  bool operator==(const AnnotationRecord& o) const {
    return image_id == o.image_id && bbox.min() == o.bbox.min() && bbox.max() == o.bbox.max() &&
           keypoints.cols() == o.keypoints.cols() && keypoints == o.keypoints;
  }
};

inline constexpr int kPredictionControlPoints = 5;

struct PredictionRecord {
  std::string image_id;
  double confidence = 0;
  Eigen::AlignedBox2d bbox;
  Eigen::Matrix2Xd control_points;

  bool operator==(const PredictionRecord& o) const {
    return image_id == o.image_id && confidence == o.confidence && bbox.min() == o.bbox.min() &&
           bbox.max() == o.bbox.max() && control_points.cols() == o.control_points.cols() &&
           control_points == o.control_points;
  }
};

// Looser record used by the CLI for ground-truth fits and predictions alike.
struct CurveRecord {
  std::string image_id;
  Eigen::AlignedBox2d bbox;
  Eigen::Matrix2Xd control_points;
  std::optional<double> confidence;
  std::optional<double> residual_rms;
  std::optional<std::string> parameterization;

  Curve2d curve() const { return Curve2d(control_points); }
};

std::vector<AnnotationRecord> ParseAnnotations(std::istream& in, const std::string& source);
std::vector<AnnotationRecord> ParseAnnotations(const std::filesystem::path& path);
std::string FormatAnnotation(const AnnotationRecord& record);
void WriteAnnotations(const std::vector<AnnotationRecord>& records,
                      const std::filesystem::path& path);

std::vector<PredictionRecord> ParsePredictions(std::istream& in, const std::string& source);
std::vector<PredictionRecord> ParsePredictions(const std::filesystem::path& path);
std::string FormatPrediction(const PredictionRecord& record);
void WritePredictions(const std::vector<PredictionRecord>& records,
                      const std::filesystem::path& path);

std::vector<CurveRecord> ParseCurves(std::istream& in, const std::string& source);
std::vector<CurveRecord> ParseCurves(const std::filesystem::path& path);
std::string FormatCurve(const CurveRecord& record);
void WriteCurves(const std::vector<CurveRecord>& records, const std::filesystem::path& path);

DepthMap DecodeDepth(std::string_view bytes, const std::string& source);
DepthMap ParseDepth(const std::filesystem::path& path);
std::string EncodePfm(const DepthMap& map);
std::string EncodeRawDepth(const DepthMap& map);
void WritePfm(const DepthMap& map, const std::filesystem::path& path);
void WriteRawDepth(const DepthMap& map, const std::filesystem::path& path);

CameraIntrinsics ParseIntrinsics(std::istream& in, const std::string& source);
CameraIntrinsics ParseIntrinsics(const std::filesystem::path& path);
std::string FormatIntrinsics(const CameraIntrinsics& camera);
void WriteIntrinsics(const CameraIntrinsics& camera, const std::filesystem::path& path);

// One number per line; blank lines and '#' comments skipped.
std::vector<double> ParseErrors(const std::filesystem::path& path);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace trunk
