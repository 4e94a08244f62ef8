#pragma once

namespace spectralforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

int run(int argc, char** argv);

}  // namespace spectralforge::cli
