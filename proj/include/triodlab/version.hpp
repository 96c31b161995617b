#pragma once

namespace triodlab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSnapshotFormatVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

}  // namespace triodlab
