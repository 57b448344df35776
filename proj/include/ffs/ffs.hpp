#pragma once

#include "field.hpp"
#include "upoly.hpp"
#include "bipoly.hpp"
#include "parse.hpp"
#include "alpha.hpp"
#include "sieve.hpp"
#include "laurent.hpp"
#include "size_rank.hpp"
#include "inseparable.hpp"
#include "select.hpp"
