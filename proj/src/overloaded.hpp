#pragma once

namespace plrp::detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace plrp::detail
