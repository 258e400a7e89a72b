#pragma once

#include <string>
#include <vector>

#include "skm1/diagnostics.hpp"
#include "skm1/m1.hpp"

namespace skm1 {

/// CSV schema: header "t,v_minus_1..d,v_plus_1..d", doubles printed with 17
/// significant digits (bit-exact round trip).
void write_path_csv(const CadlagPath& path, const std::string& file);
CadlagPath read_path_csv(const std::string& file);

std::string format_double(double x);  // %.17g

/// Matching certificate rows: i, j, r_A, r_B, cost contribution.
void write_matching_csv(const M1Result& result, const DensifiedGraph& a,
                        const DensifiedGraph& b, const std::string& file);

/// Long-format scan rows: scenario, gamma, delta, epsilon, functional, t,
/// estimate, stderr.
void write_report_csv(const std::vector<EstimateRow>& rows, const std::string& file);

/// 480x480 panel; polyline of (x1, x2) for 2-d paths, (t, x) for scalars.
/// Same samples as the CSV breakpoints.
void write_path_svg(const CadlagPath& path, const std::string& file);

}  // namespace skm1
