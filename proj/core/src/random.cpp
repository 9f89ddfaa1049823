#include "dgp/random.hpp"

#include <istream>
#include <ostream>

namespace dgp {

void RandomStream::save(std::ostream& os) const {
  os << seed_ << '\n' << gen_ << '\n' << normal_ << '\n' << uniform_ << '\n';
}

void RandomStream::load(std::istream& is) {
  is >> seed_ >> gen_ >> normal_ >> uniform_;
}

}  // namespace dgp
