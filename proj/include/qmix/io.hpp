#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmix/dirichlet_gap.hpp"
#include "qmix/generators.hpp"
#include "qmix/ls_estimator.hpp"
#include "qmix/mixing.hpp"
#include "qmix/regularity.hpp"

namespace qmix {

using json = nlohmann::json;

// Malformed input; `where` names the offending field or "line L, column C".
class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& where, const std::string& message)
        : std::runtime_error(where + ": " + message), where_(where), message_(message)
    {
    }
    const std::string& where() const { return where_; }
    const std::string& message() const { return message_; }

private:
    std::string where_, message_;
};

// Row-major nested arrays of [re, im] pairs; plain numbers are accepted on input as real entries.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& field);

json parse_json_text(const std::string& text);
json read_json_file(const std::string& path);

Generator generator_from_json(const json& spec);
Generator load_generator(const std::string& path);

json flags_to_json(const Generator& g);
json gap_to_json(const GapReport& gap);
json ls_to_json(const LSReport& ls);
json profile_to_json(const RegularityProfile& profile);
json direct_regularity_to_json(const DirectRegularityReport& report);
json verdict_to_json(const PartialOrderVerdict& v);
json scan_record_to_json(const ScanRecord& rec);

json curve_to_json(const MixingCurve& curve);
std::string curve_to_csv(const MixingCurve& curve);

}  // namespace qmix
