#pragma once

// Frozen outputs of the scripts in this directory. Regenerate with
//   python3 s_grid_oracle.py; python3 mp_oracles.py; python3 lmg_symbolic.py

namespace dqpt::oracle {

// s_grid_oracle.py: minimum over 10^6 interior grid points r in (x, 1).
struct SGridValue {
    double x;
    double s;
    double r;
};
inline constexpr SGridValue kSGrid[] = {
    {0.1, 0.020044683157955268, 0.53339276660723345},
    {0.2, 0.080726721359198866, 0.56715163284836723},
    {0.3, 0.18378456526838208, 0.60168849831150162},
    {0.4, 0.33247392018975164, 0.63751996248003751},
    {0.5, 0.53229790889202266, 0.67538032461967534},
    {0.6, 0.79263529448041004, 0.71644228355771644},
    {0.7, 1.1308920012585084, 0.76289973710026282},
    {0.8, 1.5864313242982333, 0.81982498017501981},
    {0.9, 2.3021828844130012, 0.90039599960400041},
};

// mp_oracles.py (60 digits).
inline constexpr double kBinaryKl07_04 = 0.1837868973868122875644523;
inline constexpr double kSHalf = 0.5322979088919999506308684;
inline constexpr double kSHalfMinimizer = 0.6753802377971809990836837;
inline constexpr double kS0999 = 6.907755278982137052053974;

// Sector rates -(2/N) ln|A_+-| for N = 100, h0 = 0 -> h = 0.8, gamma = 1/2, g = 1.
struct RateValue {
    double t;
    double plus;
    double minus;
};
inline constexpr RateValue kRatesN100[] = {
    {1.0, 0.38657575810097524232, 0.42860406034515411024},
    {2.0, 0.7203191158858719597, 0.017442463824760975333},
    {3.5, 0.085964369342585058404, 0.10463551903684384276},
    {7.25, 0.079289162166117702296, 0.019490700819500721987},
};

// lmg_symbolic.py: j = 1, gamma = 1/2, g = 1.
inline constexpr double kJ1Diagonal[] = {-0.75, -1.5, -0.75};
inline constexpr double kJ1Coupling = -0.25;
inline constexpr double kJ1EigenH0[] = {-1.5, -1.0, -0.5};
inline constexpr double kJ1EigenH08[] = {-2.3694134740701647009, -1.5, 0.86941347407016470088};

} // namespace dqpt::oracle
