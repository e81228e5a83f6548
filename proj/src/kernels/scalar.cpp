#include "kernels/bodies.hpp"

namespace birthtail::detail {

const KernelTable& scalar_table() {
  static const KernelTable t{
      Isa::scalar,
      &vm::uniforms_body<vm::ScalarLanes>,
      &vm::sojourns_body<vm::ScalarLanes>,
      &vm::inv_rates_body<vm::ScalarLanes>,
      &vm::exp_sum_body<vm::ScalarLanes>,
      &vm::exp_body<vm::ScalarLanes>,
      &vm::log_body<vm::ScalarLanes>,
  };
  return t;
}

}  // namespace birthtail::detail
