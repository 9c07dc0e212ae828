#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crater {

// Row-major so raster loops and file IO agree on pixel layout: (row, col) = (y, x).
template <typename Scalar>
using ImageT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale raster or patch, real-valued grey levels.
using GrayRaster = ImageT<double>;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Label { True, False, Unknown };

inline std::string to_string(Label label) {
  switch (label) {
    case Label::True: return "true";
    case Label::False: return "false";
    default: return "unknown";
  }
}

inline Label label_from_string(const std::string& s) {
  if (s == "true") return Label::True;
  if (s == "false") return Label::False;
  if (s == "unknown" || s.empty()) return Label::Unknown;
  throw std::invalid_argument("unrecognised label: '" + s + "'");
}

/// A candidate crater: centre in pixel coordinates of some raster.
struct Annotation {
  std::int64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  double diameter_px = 0.0;
  Label label = Label::Unknown;
  std::string counter;  // optional counter/user id, used by repeatability input
};

enum class Measure { Mse, Dp };
enum class TemplateKind { Appearance, Derivative };

inline std::string to_string(Measure m) { return m == Measure::Mse ? "mse" : "dp"; }

inline Measure measure_from_string(const std::string& s) {
  if (s == "mse") return Measure::Mse;
  if (s == "dp") return Measure::Dp;
  throw std::invalid_argument("unrecognised measure: '" + s + "'");
}

inline std::string to_string(TemplateKind k) {
  return k == TemplateKind::Appearance ? "appearance" : "derivative";
}

inline TemplateKind template_kind_from_string(const std::string& s) {
  if (s == "appearance") return TemplateKind::Appearance;
  if (s == "derivative") return TemplateKind::Derivative;
  throw std::invalid_argument("unrecognised template kind: '" + s + "'");
}

}  // namespace crater
