#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "commands.hpp"
#include "ladderdet/errors.hpp"

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

int main(int argc, char** argv) {
    CLI::App app{"Chain-of-repetitive-structure detection: synthesize data, train the "
                 "corner-regression network, run the iterative ladder, evaluate and render."};
    app.set_version_flag("--version", ladderdet::cli::kVersion);
    app.require_subcommand(1);

    ladderdet::cli::register_synth(app);
    ladderdet::cli::register_train(app);
    ladderdet::cli::register_run(app);
    ladderdet::cli::register_eval(app);
    ladderdet::cli::register_render(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ladderdet::cli::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const ladderdet::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const ladderdet::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
