#pragma once
// Umbrella header.

#include "subrec/bitstr.hpp"
#include "subrec/dyadic.hpp"
#include "subrec/codec.hpp"
#include "subrec/timefn.hpp"
#include "subrec/vm.hpp"
#include "subrec/submachine.hpp"
#include "subrec/omega.hpp"
#include "subrec/beaver.hpp"
#include "subrec/diagonal.hpp"
#include "subrec/enumerator.hpp"
