#pragma once

#include <stdexcept>
#include <string>

namespace CLI {
class App;
}

namespace ladderdet::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line misuse that CLI11 validation cannot catch. Exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

void register_synth(CLI::App& app);
void register_train(CLI::App& app);
void register_run(CLI::App& app);
void register_eval(CLI::App& app);
void register_render(CLI::App& app);

} // namespace ladderdet::cli
