// livevox-harness: synthetic live-performance fixtures and extraction scoring.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "livevox/harness.hpp"
#include "livevox/wav.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate synthetic extraction fixtures and score residuals against them"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    auto* generate = app.add_subcommand("generate", "Synthesize a fixture bundle from a key=value spec");
    generate->add_option("--spec", spec_path, "Fixture spec file")->required();
    generate->add_option("--out", out_dir, "Output bundle directory")->required();

    std::string bundle_dir, residual_path, report_path;
    auto* score = app.add_subcommand("score", "Score an extracted residual against a bundle's truth");
    score->add_option("--bundle", bundle_dir, "Fixture bundle directory")->required();
    score->add_option("--residual", residual_path, "Residual WAV produced by livevox extract")->required();
    score->add_option("--report", report_path, "Write the JSON scorecard here")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) {
            const auto spec = livevox::harness::load_fixture_spec(spec_path);
            const auto bundle = livevox::harness::generate_fixture(spec, out_dir);
            std::cout << bundle.root.string() << '\n';
        } else if (*score) {
            const auto bundle = livevox::harness::load_bundle(bundle_dir);
            const auto residual = livevox::load_mono(residual_path);
            const auto card = livevox::harness::score_extraction(bundle, residual);
            std::ofstream out(report_path, std::ios::trunc);
            if (!out) livevox::fail_input("cannot open '" + report_path + "' for writing");
            out << livevox::harness::to_json(card).dump(2) << '\n';
            std::cout << livevox::harness::to_json(card).dump() << '\n';
        }
    } catch (const livevox::Error& e) {
        std::cerr << "livevox-harness: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "livevox-harness: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
