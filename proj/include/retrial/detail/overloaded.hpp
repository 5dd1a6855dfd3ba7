#pragma once

namespace retrial::detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace retrial::detail
