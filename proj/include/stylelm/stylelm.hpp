#pragma once

#include "stylelm/checkpoint.hpp"
#include "stylelm/config.hpp"
#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/evaluate.hpp"
#include "stylelm/filter.hpp"
#include "stylelm/generate.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/optim.hpp"
#include "stylelm/random.hpp"
#include "stylelm/remote_nli.hpp"
#include "stylelm/tensor.hpp"
#include "stylelm/train.hpp"
