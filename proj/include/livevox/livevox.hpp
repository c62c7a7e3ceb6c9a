#pragma once

#include "livevox/alignment.hpp"
#include "livevox/audio.hpp"
#include "livevox/error.hpp"
#include "livevox/gain_match.hpp"
#include "livevox/pipeline.hpp"
#include "livevox/report.hpp"
#include "livevox/separation.hpp"
#include "livevox/wav.hpp"
