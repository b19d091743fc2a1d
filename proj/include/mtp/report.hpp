#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mtp/bound.hpp"
#include "mtp/family.hpp"
#include "mtp/lab.hpp"
#include "mtp/riesz.hpp"
#include "mtp/transference.hpp"
#include "mtp/vitali.hpp"

namespace mtp {

using Json = nlohmann::ordered_json;

Json to_json(const TorusPoint& p);
Json to_json(const Ball& b);
Json to_json(const Shape& s);
Json to_json(const RieszEstimate& e);
Json to_json(const MeasureEnergy& e);
Json to_json(const FamilyTraits& t);
Json to_json(const DimensionReport& r);
Json to_json(const CoverSelection& s);
Json to_json(const TruncationWindow& w);
Json to_json(const SelectedUnion& s);
Json to_json(const DensityProbe& p);
Json to_json(const MuEnergyReport& r);
Json to_json(const TrendTest& t);
Json to_json(const CoveringCountCurve& c);
Json to_json(const ContentEstimate& c);
Json to_json(const IntersectionReport& r);

/// "t,sup_stat" rows sorted by t.
std::string bound_csv(const DimensionReport& r);
/// "delta,count" rows.
std::string curve_csv(const CoveringCountCurve& c);

}  // namespace mtp
