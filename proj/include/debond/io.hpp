#pragma once

#include "debond/audit.hpp"
#include "debond/onedim.hpp"

#include <string>

namespace debond::io {

/// Masks as ASCII PGM (P2, maxval 1): lossless and diff-friendly.
void write_mask_pgm(const std::string& path, const RegionMask& mask);
RegionMask read_mask_pgm(const std::string& path, const Grid& g);

/// Mask indicator as a value CSV (readable back as a raster spec).
void write_mask_csv(const std::string& path, const RegionMask& mask);

/// Fields as CSV with node index, coordinates and 17-significant-digit
/// values: lossless for doubles.
void write_field_csv(const std::string& path, const ScalarField& f);
ScalarField read_field_csv(const std::string& path, const Grid& g);

/// Per-node values (toughness rasters, mask rasters) from a value CSV.
std::vector<double> read_node_values_csv(const std::string& path, const Grid& g);

inline constexpr const char* kLedgerHeader =
    "i,t,elastic,dissipated,work,eb_residual,gs_margin,front";
void write_ledger_csv(const std::string& path, const EvolutionTrace& trace);

void write_audit_csv(const std::string& path, const std::vector<audit::AuditRow>& rows);
void write_audit_summary(const std::string& path, const audit::AuditReport& rep,
                         const audit::Certification& cert);

/// Competitor margins of one stability check: id, type, margin, pass flag.
void write_competitors_csv(const std::string& path, const StabilityReport& report);

void write_trajectory_csv(const std::string& path, const onedim::BalanceSeries& balance);

void write_refine_csv(const std::string& path, const std::vector<RefineRow>& rows);

/// Grayscale 8-bit PNG of a field (d = 2), linearly scaled to its range.
/// Rendering only; excluded from any certified output.
void write_field_png(const std::string& path, const ScalarField& f);

}  // namespace debond::io
