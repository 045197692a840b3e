#include "dadp/errors.hpp"

namespace dadp {

Divergence::Divergence(const std::string& what, double time)
    : Error(what), time_(time) {}

RankDeficient::RankDeficient(const std::string& what, int rank, int required)
    : Error(what), rank_(rank), required_(required) {}

}  // namespace dadp
