#pragma once

#include "crater/calibrate.hpp"
#include "crater/counting_model.hpp"
#include "crater/lpm.hpp"
#include "crater/scores.hpp"
#include "crater/templates.hpp"
#include "crater/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace crater::io {

/// Formats a double with 17 significant digits (round-trip exact).
std::string num17(double v);

// --- PGM rasters (binary P5, 8- or 16-bit) ---------------------------------

GrayRaster read_pgm(const std::string& path);
/// Values are rounded and clamped to [0, maxval]; maxval 255 or 65535.
void write_pgm(const std::string& path, const GrayRaster& raster, int maxval = 255);

// --- CSV --------------------------------------------------------------------

/// Annotations: header id,x,y,diameter_px,label[,counter].
std::vector<Annotation> read_annotations_csv(const std::string& path);
void write_annotations_csv(const std::string& path, std::span<const Annotation> annotations,
                           bool with_counter = false);

/// Match results: header id,label,measure,template_kind,best_score,best_sigma.
std::vector<MatchResult> read_match_csv(const std::string& path);
void write_match_csv(const std::string& path, std::span<const MatchResult> results);

/// Simulated regions: header n_true,n_false,p_true,p_false,n_detected.
void write_regions_csv(const std::string& path, std::span<const RegionDraw> draws);

/// SFD: header band_lo,band_hi,count,sigma.
void write_sfd_csv(const std::string& path, std::span<const SfdBin> bins);

// --- JSON persistence -------------------------------------------------------

void save_template(const std::string& path, const Template& tpl);
Template load_template(const std::string& path);

void save_histogram(const std::string& path, const ScoreHistogram& hist);
ScoreHistogram load_histogram(const std::string& path);

void save_model(const std::string& path, const lpm::LpmModel& model);
lpm::LpmModel load_model(const std::string& path);

void save_scaling_factors(const std::string& path, std::span<const ScalingFactor> factors,
                          double success_prob, const std::vector<double>& chi2_report);
std::vector<ScalingFactor> load_scaling_factors(const std::string& path);

}  // namespace crater::io
