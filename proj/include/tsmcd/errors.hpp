#ifndef TSMCD_ERRORS_HPP
#define TSMCD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tsmcd {

enum class errc {
  invalid_subset,
  insufficient_events,
  singular_design,
  nonconvex_subproblem,
  degenerate_window,
  invalid_thresholds,
  infeasible_config,
  invalid_argument,
  data_format,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_subset: return "invalid-subset";
    case errc::insufficient_events: return "insufficient-events";
    case errc::singular_design: return "singular-design";
    case errc::nonconvex_subproblem: return "nonconvex-subproblem";
    case errc::degenerate_window: return "degenerate-window";
    case errc::invalid_thresholds: return "invalid-thresholds";
    case errc::infeasible_config: return "infeasible-config";
    case errc::invalid_argument: return "invalid-argument";
    case errc::data_format: return "data-format";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace tsmcd

#endif
