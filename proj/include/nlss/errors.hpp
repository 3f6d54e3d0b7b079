#pragma once

#include <stdexcept>
#include <string>

namespace nlss {

// File or payload content that cannot be used: parse failures, malformed
// containers, dimension mismatches between files.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A metric mask selected no voxels (empty foreground, all spectra skipped).
class EmptyMaskError : public DataError {
public:
    explicit EmptyMaskError(const std::string& what) : DataError(what) {}
};

// Aggregation left pixels covered by no patch.
class CoverageGapError : public DataError {
public:
    explicit CoverageGapError(const std::string& what) : DataError(what) {}
};

}  // namespace nlss
