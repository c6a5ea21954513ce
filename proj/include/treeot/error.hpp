#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treeot {

enum class ErrorCode {
  kSelfLoop,
  kNonPositiveWeight,
  kDuplicateEdge,
  kDisconnected,
  kVertexOutOfRange,
  kNotSpanning,
  kHasCycle,
  kEdgeNotInGraph,
  kMassMismatch,
  kInvalidMeasure,
  kConditionViolated,
  kNotImprovable,
  kTooLarge,
  kBadDimensions,
  kNegativePixel,
  kInvalidConfig,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a code so callers (and tests)
// can branch on the kind of failure rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace treeot
