from .fast import FastSSCList, fast_decoder_for, fast_ssc_list_decode
from .primitives import (
    CandidateSet,
    combine,
    decode_rate0,
    decode_rate1,
    decode_repetition,
    decode_spc,
    f_minsum,
    g_func,
    sort_select,
)
from .sc import sc_decode, sc_decode_codeword
from .scl import DecoderConfig, DecodingPath, ListResult, ca_scl_select, scl_decode

__all__ = [
    "CandidateSet",
    "DecoderConfig",
    "DecodingPath",
    "FastSSCList",
    "ListResult",
    "ca_scl_select",
    "combine",
    "decode_rate0",
    "decode_rate1",
    "decode_repetition",
    "decode_spc",
    "f_minsum",
    "fast_decoder_for",
    "fast_ssc_list_decode",
    "g_func",
    "sc_decode",
    "sc_decode_codeword",
    "scl_decode",
    "sort_select",
]
