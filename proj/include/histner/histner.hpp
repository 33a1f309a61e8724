#pragma once

// Convenience include for the whole library.

#include "histner/alignment.hpp"
#include "histner/conll.hpp"
#include "histner/corpus.hpp"
#include "histner/corruption.hpp"
#include "histner/evaluation.hpp"
#include "histner/ocr_channel.hpp"
#include "histner/rng.hpp"
#include "histner/utf8.hpp"
