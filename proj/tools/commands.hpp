#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace heatctl::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kInfeasible = 3,  // also a diverged simulation
    kInconclusive = 4,
};

/// All files of a run go through one writer; the manifest lists them.
class ReportWriter {
public:
    explicit ReportWriter(std::filesystem::path dir);

    void write(const std::string& name, const std::function<void(std::ostream&)>& fill);
    void manifest(const std::string& command, const RunConfig& config, unsigned threads, std::uint64_t seed,
                  const json& extra = json::object());
    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

struct Context {
    RunConfig config;
    ReportWriter* out{};
    std::ostream* log{};
    unsigned threads{0};
    std::uint64_t seed{0};
    std::size_t count_override{0};  // spectrum rows from the command line
};

int cmd_spectrum(Context& ctx);
int cmd_design(Context& ctx);
int cmd_verify(Context& ctx);
int cmd_max_delay(Context& ctx);
int cmd_simulate(Context& ctx);
int cmd_reproduce(Context& ctx, const std::string& which);

/// Modal system for the configured shapes (reference shapes when none are given).
[[nodiscard]] ModalSystem configured_system(const RunConfig& config, std::size_t N, double delta,
                                           std::size_t basis_modes = 0);

}  // namespace heatctl::cli
