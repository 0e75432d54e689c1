#pragma once

#include <string>

#include <json.hpp>

#include "odr/consistency_lab.hpp"
#include "odr/fitting.hpp"
#include "odr/gap_eval.hpp"
#include "odr/gaussian.hpp"
#include "odr/simulators.hpp"

namespace odr {

using Json = nlohmann::ordered_json;

Json to_json(const DiagonalGaussian& g);
DiagonalGaussian gaussian_from_json(const Json& j);

Json to_json(const ParamBox& box);
ParamBox param_box_from_json(const Json& j);

Json to_json(const FiniteMdpClass& c);
FiniteMdpClass finite_class_from_json(const Json& j);

Json to_json(const FitConfig& config);
/// Fields missing from `j` keep the values in `defaults`.
FitConfig fit_config_from_json(const Json& j, FitConfig defaults = {});

Json to_json(const FitResult& result);
std::string fit_csv_header();
std::string fit_csv_row(const FitResult& result);

Json to_json(const GapReport& report);
std::string gap_csv(const GapReport& report);

Json to_json(const SweepReport& report);
std::string sweep_csv(const SweepReport& report);

/// %.17g, "nan", "inf" or "-inf".
std::string format_double(double v);

}  // namespace odr
