#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hid/errors.hpp"
#include "hid/headswap.hpp"

namespace hid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Bad command-line input or configuration content.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Settings shared by swap, mask and ablate.
struct CliSettings {
    SwapConfig swap{};
    std::uint64_t seed = 0;
};

/// Applies `key = value` lines (keys T, w, tau, sigma, edit_fraction, variant,
/// seed; '#' starts a comment) on top of `base`. Unknown keys and bad values
/// raise UsageError; an unreadable file raises IoError.
CliSettings apply_config_file(const std::filesystem::path& path, CliSettings base);

/// Parses "a,b,c,d,e" into attributes; UsageError names the offending field.
AttributeSpec parse_attribute_tuple(const std::string& text, const std::string& flag);

/// Entry point of the `hid` tool. Returns 0 on success, 1 on usage errors and
/// 2 on runtime errors.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hid
