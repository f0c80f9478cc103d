#include <iostream>

#include "CLI11.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"skyjoin-gen - write a reproducible demo sky with config and queries"};

    skyjoin::synth::DemoSpec spec;
    std::string out_dir = "demo";
    app.add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", spec.seed, "generator seed")->capture_default_str();
    app.add_option("--objects", spec.objects, "shared objects")->capture_default_str();
    app.add_option("--sdss-bg", spec.sdss_background, "sdss-only detections")
        ->capture_default_str();
    app.add_option("--galex-bg", spec.galex_background, "galex-only detections")
        ->capture_default_str();
    app.add_option("--twomass-bg", spec.twomass_background, "twomass-only detections")
        ->capture_default_str();
    app.add_option("--radius-deg", spec.field_radius_deg, "field radius, degrees")
        ->capture_default_str();
    app.add_option("--center-ra", spec.center_ra_deg, "field center RA, degrees")
        ->capture_default_str();
    app.add_option("--center-dec", spec.center_dec_deg, "field center Dec, degrees")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        std::cout << skyjoin::synth::write_demo(out_dir, spec) << "\n";
        return 0;
    } catch (const skyjoin::EngineError& e) {
        std::cerr << "error[" << skyjoin::error_code_name(e.code()) << "] " << e.what() << "\n";
        return skyjoin::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
