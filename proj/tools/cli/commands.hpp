#pragma once

#include <iosfwd>

#include "config.hpp"
#include "latgauge/error.hpp"

namespace latgauge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kExitConvergence = 4;

int exit_code(ErrorKind kind) noexcept;

/// Runs one command and writes its outputs under config.output.directory.
/// Library errors escape as exceptions; the caller maps them.
int run(const RunConfig& config, std::ostream& log);

/// Scan CSV header, fixed column order.
inline constexpr const char* kScanColumns = "dims,g,a,f,sector_dim,E0,gap,vacuum_mult,residual,seconds";

}  // namespace latgauge::cli
