#pragma once

#include <array>
#include <string>

namespace testutil {

/// Printed accuracy, sample count and 95% interval for the aggregate tables.
struct CiRow {
  const char* label;
  double acc;
  long n;
  double low;
  double high;
};

// Letter strings by generalization count, then digit matrices by variant.
inline constexpr std::array<CiRow, 25> kCiRows = {{
    {"letters humans 0", 0.754, 1876, 0.734, 0.773},
    {"letters humans 1", 0.358, 1062, 0.329, 0.386},
    {"letters humans 2", 0.317, 504, 0.277, 0.358},
    {"letters humans 3", 0.260, 504, 0.222, 0.298},
    {"letters gpt3 0", 0.488, 2140, 0.467, 0.509},
    {"letters gpt3 1", 0.333, 2100, 0.313, 0.353},
    {"letters gpt3 2", 0.194, 2450, 0.179, 0.210},
    {"letters gpt3 3", 0.160, 2450, 0.145, 0.174},
    {"letters gpt35 0", 0.350, 2140, 0.330, 0.370},
    {"letters gpt35 1", 0.175, 2560, 0.161, 0.190},
    {"letters gpt35 2", 0.131, 2450, 0.117, 0.144},
    {"letters gpt35 3", 0.078, 2450, 0.067, 0.088},
    {"letters gpt4 0", 0.452, 2140, 0.431, 0.473},
    {"letters gpt4 1", 0.271, 2560, 0.253, 0.288},
    {"letters gpt4 2", 0.219, 2450, 0.202, 0.235},
    {"letters gpt4 3", 0.195, 2450, 0.179, 0.210},
    {"matrix humans digits", 0.715, 1550, 0.693, 0.738},
    {"matrix humans alt-blank", 0.771, 1000, 0.745, 0.797},
    {"matrix humans symbols", 0.704, 1000, 0.676, 0.732},
    {"matrix gpt35 digits", 0.813, 2916, 0.799, 0.827},
    {"matrix gpt35 alt-blank", 0.480, 1466, 0.455, 0.506},
    {"matrix gpt35 symbols", 0.790, 2100, 0.772, 0.808},
    {"matrix gpt4 digits", 0.810, 2916, 0.796, 0.824},
    {"matrix gpt4 alt-blank", 0.477, 1466, 0.452, 0.503},
    {"matrix gpt4 symbols", 0.792, 2100, 0.774, 0.810},
}};

}  // namespace testutil
