# -*- coding: utf-8 -*-
"""
Lossless canonical Huffman coding of quantized maps.

One Huffman code is built per map. The block header stores the code length of
every possible symbol value, so that the decoder rebuilds the identical
canonical code. Symbols with equal code length are ordered by symbol value.

Block layout, all integers little-endian::

    offset  size        field
    0       4           magic b'ESFB'
    4       1           format version (1)
    5       1           flags: bit 0 passthrough, bit 1 degenerate
    6       1           bit-depth c
    7       1           number of dimensions d
    8       4           layer index (uint32)
    12      8           v_min (float64)
    20      8           v_max (float64)
    28      8           symbol count (uint64)
    36      4           payload length in bytes (uint32)
    40      4*d         shape (uint32 each)
    40+4d   2^c         code length per symbol value, 0 = absent
                        (degenerate blocks: 4 bytes, the only symbol)
    ...     payload     codewords, MSB-first within bytes, zero padded

A map with a single distinct symbol is a degenerate block: the header carries
the symbol and the count, the payload is empty.

The decoder rejects blocks declaring more than MAX_SYMBOL_COUNT symbols and
blocks whose payload is too short for the declared count before it allocates
the symbol array.
"""

from dataclasses import dataclass
import heapq
import struct

import numpy as np

from edgesplit.business.exceptions import (
    AlphabetTooLargeError,
    CodecError,
    InvalidCodeError,
    InvalidHeaderError,
    SymbolCountError,
    TruncatedPayloadError,
)
from edgesplit.business.quantizer import QuantizedMap
from edgesplit.utils import product


MAGIC = b'ESFB'
FORMAT_VERSION = 1
MAX_CODEC_BIT_DEPTH = 16
MAX_CODE_LENGTH = 32
MAX_SYMBOL_COUNT = 1 << 26

FLAG_PASSTHROUGH = 0x01
FLAG_DEGENERATE = 0x02

HEADER = struct.Struct('<4sBBBBIddQI')
DEGENERATE_SYMBOL = struct.Struct('<I')

# Symbols encoded per vectorised packing step.
_CHUNK = 1 << 16


@dataclass(frozen=True)
class EncodedBlock(object):
    """
    A framed, Huffman coded quantized map.

    Attributes:
        layer_index: The decoupling point the map belongs to, 0 for the
            model input.
        bit_depth: The bit-depth c of the symbols.
        shape: The dimensions of the map.
        v_min: The minimum of the original values.
        v_max: The maximum of the original values.
        passthrough: The passthrough flag of the quantized map.
        symbol_count: The number of symbols, the product of the shape.
        code_lengths: One byte per possible symbol value, None for degenerate
            blocks.
        degenerate_symbol: The only symbol of a degenerate block, else None.
        payload: The packed codewords.
    """

    layer_index: int
    bit_depth: int
    shape: tuple
    v_min: float
    v_max: float
    passthrough: bool
    symbol_count: int
    code_lengths: bytes
    degenerate_symbol: int
    payload: bytes

    @property
    def degenerate(self):
        return self.degenerate_symbol is not None

    @property
    def header_size(self):
        table_size = (DEGENERATE_SYMBOL.size if self.degenerate
                      else len(self.code_lengths))
        return HEADER.size + 4 * len(self.shape) + table_size

    @property
    def size(self):
        """
        The byte length of the serialized block.
        """
        return self.header_size + len(self.payload)

    def to_bytes(self):
        """
        Serializes the block with the documented layout.
        """
        return block_to_bytes(self)


def _check_codec_bit_depth(bit_depth):
    if bit_depth < 1:
        raise InvalidHeaderError(
            'bit-depth {0} is below 1'.format(bit_depth))
    if bit_depth > MAX_CODEC_BIT_DEPTH:
        raise AlphabetTooLargeError(
            'bit-depth {0} exceeds the {1}-bit alphabet of the block '
            'format'.format(bit_depth, MAX_CODEC_BIT_DEPTH))


def _check_range(v_min, v_max):
    if not (np.isfinite(v_min) and np.isfinite(v_max)):
        raise InvalidHeaderError('non-finite value range')
    if v_min > v_max:
        raise InvalidHeaderError(
            'v_min {0} exceeds v_max {1}'.format(v_min, v_max))


def _limit_lengths(lengths, frequencies, max_length):
    """
    Limits code lengths to max_length by moving leaves up the tree, then
    hands the resulting lengths to the symbols in order of decreasing
    frequency.
    """
    deepest = int(lengths.max())
    counts = [0] * (deepest + 1)
    for length in lengths[lengths > 0]:
        counts[int(length)] += 1
    for length in range(deepest, max_length, -1):
        while counts[length] > 0:
            shorter = length - 2
            while counts[shorter] == 0:
                shorter -= 1
            counts[length] -= 2
            counts[length - 1] += 1
            counts[shorter + 1] += 2
            counts[shorter] -= 1
    present = np.flatnonzero(frequencies)
    by_frequency = sorted(
        present.tolist(), key=lambda symbol: (-int(frequencies[symbol]), symbol))
    limited = np.zeros(len(lengths), dtype=np.uint8)
    position = 0
    for length in range(1, max_length + 1):
        for _ in range(counts[length]):
            limited[by_frequency[position]] = length
            position += 1
    return limited


def code_lengths(frequencies, max_length=MAX_CODE_LENGTH):
    """
    Computes Huffman code lengths.

    Ties between equal weights are broken by symbol value, then by creation
    order of the merged nodes, so identical frequencies always yield
    identical lengths.

    Args:
        frequencies: The count of every symbol value.
        max_length: The longest permitted code.

    Returns:
        A uint8 array of code lengths, 0 for absent symbols.
    """
    frequencies = np.asarray(frequencies, dtype=np.int64)
    alphabet = len(frequencies)
    lengths = np.zeros(alphabet, dtype=np.int64)
    present = np.flatnonzero(frequencies)
    if present.size == 0:
        return lengths.astype(np.uint8)
    if present.size == 1:
        lengths[present[0]] = 1
        return lengths.astype(np.uint8)

    heap = [(int(frequencies[symbol]), int(symbol)) for symbol in present]
    heapq.heapify(heap)
    parent = {}
    next_node = alphabet
    while len(heap) > 1:
        weight_a, node_a = heapq.heappop(heap)
        weight_b, node_b = heapq.heappop(heap)
        parent[node_a] = next_node
        parent[node_b] = next_node
        heapq.heappush(heap, (weight_a + weight_b, next_node))
        next_node += 1

    # Parents are created after their children, so a descending walk over
    # node ids visits every parent before its children.
    depth = {next_node - 1: 0}
    for node in sorted(parent, reverse=True):
        depth[node] = depth[parent[node]] + 1
    for symbol in present:
        lengths[symbol] = depth[int(symbol)]
    if int(lengths.max()) > max_length:
        return _limit_lengths(lengths, frequencies, max_length)
    return lengths.astype(np.uint8)


def canonical_codes(lengths):
    """
    Assigns canonical codewords to code lengths.

    Returns:
        A uint64 array holding the codeword of every symbol value.
    """
    lengths = np.asarray(lengths)
    codes = np.zeros(len(lengths), dtype=np.uint64)
    order = sorted(
        (int(length), int(symbol))
        for symbol, length in enumerate(lengths) if length)
    code = 0
    previous = 0
    for length, symbol in order:
        code <<= (length - previous)
        previous = length
        codes[symbol] = code
        code += 1
    return codes


def _kraft_ok(lengths):
    total = 0
    for length in lengths:
        length = int(length)
        if length:
            if length > MAX_CODE_LENGTH:
                return False
            total += 1 << (MAX_CODE_LENGTH - length)
    return total <= 1 << MAX_CODE_LENGTH


def _frequencies(quantized_map):
    return np.bincount(
        quantized_map.symbols.astype(np.int64),
        minlength=1 << quantized_map.bit_depth)


def _pack(symbols, codes, lengths):
    """
    Concatenates the codewords of the symbols MSB-first and packs them into
    bytes.
    """
    longest = np.uint64(int(lengths.max()))
    positions = np.arange(int(longest), dtype=np.uint64)
    shifts = longest - np.uint64(1) - positions
    streams = []
    for start in range(0, symbols.size, _CHUNK):
        chunk = symbols[start:start + _CHUNK].astype(np.int64)
        chunk_codes = codes[chunk]
        chunk_lengths = lengths[chunk].astype(np.uint64)
        aligned = chunk_codes << (longest - chunk_lengths)
        bits = (aligned[:, None] >> shifts[None, :]) & np.uint64(1)
        mask = positions[None, :] < chunk_lengths[:, None]
        streams.append(bits[mask].astype(np.uint8))
    return np.packbits(np.concatenate(streams)).tobytes()


def encode(quantized_map, layer_index):
    """
    Encodes a quantized map into a block.

    Args:
        quantized_map: The QuantizedMap, bit-depth at most 16.
        layer_index: The decoupling point the map belongs to.

    Returns:
        The EncodedBlock.

    Raises:
        AlphabetTooLargeError: The bit-depth exceeds 16.
    """
    quantized_map.validate()
    _check_codec_bit_depth(quantized_map.bit_depth)
    frequencies = _frequencies(quantized_map)
    present = np.flatnonzero(frequencies)
    common = dict(
        layer_index=int(layer_index),
        bit_depth=quantized_map.bit_depth,
        shape=tuple(quantized_map.shape),
        v_min=quantized_map.v_min,
        v_max=quantized_map.v_max,
        passthrough=bool(quantized_map.passthrough),
        symbol_count=int(quantized_map.symbols.size))
    if present.size == 1:
        return EncodedBlock(
            code_lengths=None,
            degenerate_symbol=int(present[0]),
            payload=b'',
            **common)
    lengths = code_lengths(frequencies)
    payload = _pack(quantized_map.symbols, canonical_codes(lengths), lengths)
    return EncodedBlock(
        code_lengths=lengths.tobytes(),
        degenerate_symbol=None,
        payload=payload,
        **common)


def size_breakdown(quantized_map):
    """
    The header and payload bytes of the block of a quantized map, computed
    from the symbol frequencies without packing the payload.

    Returns:
        The tuple (header bytes including the code-length table, payload
        bytes).
    """
    quantized_map.validate()
    _check_codec_bit_depth(quantized_map.bit_depth)
    frequencies = _frequencies(quantized_map)
    header = HEADER.size + 4 * len(quantized_map.shape)
    if np.count_nonzero(frequencies) == 1:
        return header + DEGENERATE_SYMBOL.size, 0
    lengths = code_lengths(frequencies)
    bits = int(np.dot(frequencies, lengths.astype(np.int64)))
    return header + len(lengths), (bits + 7) // 8


def encoded_size(quantized_map):
    """
    The byte length of ``encode(quantized_map).to_bytes()``.
    """
    return sum(size_breakdown(quantized_map))


def _decode_payload(block, lengths):
    """
    Decodes the canonical codewords of a block payload.
    """
    count = block.symbol_count
    present_lengths = sorted(set(int(length) for length in lengths if length))
    longest = present_lengths[-1]
    ordered = sorted(
        (int(length), symbol)
        for symbol, length in enumerate(lengths) if length)
    symbols_in_order = [symbol for _, symbol in ordered]
    length_count = dict.fromkeys(range(1, longest + 1), 0)
    for length, _ in ordered:
        length_count[length] += 1
    first_code = {}
    first_index = {}
    code = 0
    index = 0
    for length in range(1, longest + 1):
        first_code[length] = code
        first_index[length] = index
        code = (code + length_count[length]) << 1
        index += length_count[length]

    bits = np.unpackbits(np.frombuffer(block.payload, dtype=np.uint8))
    available = bits.size
    if count * present_lengths[0] > available:
        raise TruncatedPayloadError(
            '{0} symbols need at least {1} bits, {2} present'.format(
                count, count * present_lengths[0], available))
    padded = np.concatenate([bits, np.zeros(longest, dtype=np.uint8)])
    windows = np.zeros(available, dtype=np.uint64)
    for offset in range(longest):
        windows = (windows << np.uint64(1)) | padded[
            offset:offset + available].astype(np.uint64)
    windows = windows.tolist()

    decoded = np.empty(count, dtype=np.uint64)
    position = 0
    for output in range(count):
        if position >= available:
            raise TruncatedPayloadError(
                '{0} of {1} symbols decoded'.format(output, count))
        window = windows[position]
        for length in present_lengths:
            offset = (window >> (longest - length)) - first_code[length]
            if offset < length_count[length]:
                decoded[output] = symbols_in_order[first_index[length] + offset]
                position += length
                break
        else:
            raise InvalidCodeError('undecodable codeword at bit {0}'.format(
                position))
        if position > available:
            raise TruncatedPayloadError(
                '{0} of {1} symbols decoded'.format(output, count))
    if available - position >= 8:
        raise SymbolCountError(
            'symbol-count mismatch: {0} bits left after {1} symbols'.format(
                available - position, count))
    return decoded


def decode(block):
    """
    Decodes a block into the quantized map it was encoded from.

    Args:
        block: An EncodedBlock or its serialized bytes.

    Returns:
        The QuantizedMap.

    Raises:
        TruncatedPayloadError: The block ends early.
        InvalidCodeError: The code-length table violates the Kraft
            inequality or the payload contains an undecodable codeword.
        SymbolCountError: The symbol count does not match the shape or the
            payload, or exceeds MAX_SYMBOL_COUNT.
        InvalidHeaderError: The bit-depth or the value range is out of
            range.
    """
    if isinstance(block, (bytes, bytearray, memoryview)):
        block = block_from_bytes(bytes(block))
    _check_codec_bit_depth(block.bit_depth)
    _check_range(block.v_min, block.v_max)
    if block.symbol_count != product(block.shape):
        raise SymbolCountError(
            'symbol-count mismatch: {0} declared, shape {1} has {2}'.format(
                block.symbol_count, list(block.shape), product(block.shape)))
    if block.symbol_count > MAX_SYMBOL_COUNT:
        raise SymbolCountError(
            '{0} symbols exceed the decoder limit of {1}'.format(
                block.symbol_count, MAX_SYMBOL_COUNT))
    if block.degenerate:
        if block.degenerate_symbol >= 1 << block.bit_depth:
            raise InvalidCodeError(
                'symbol {0} outside the alphabet'.format(
                    block.degenerate_symbol))
        symbols = np.full(
            block.symbol_count, block.degenerate_symbol, dtype=np.uint64)
    else:
        lengths = np.frombuffer(block.code_lengths, dtype=np.uint8)
        if len(lengths) != 1 << block.bit_depth:
            raise InvalidCodeError('code-length table has wrong size')
        if not lengths.any():
            raise InvalidCodeError('code-length table is empty')
        if not _kraft_ok(lengths):
            raise InvalidCodeError('Kraft sum exceeds 1')
        symbols = _decode_payload(block, lengths)
    return QuantizedMap(
        shape=tuple(block.shape),
        bit_depth=block.bit_depth,
        v_min=block.v_min,
        v_max=block.v_max,
        passthrough=block.passthrough,
        symbols=symbols)


def block_to_bytes(block):
    """
    Serializes a block with the documented layout.
    """
    flags = 0
    if block.passthrough:
        flags |= FLAG_PASSTHROUGH
    if block.degenerate:
        flags |= FLAG_DEGENERATE
    parts = [
        HEADER.pack(
            MAGIC, FORMAT_VERSION, flags, block.bit_depth, len(block.shape),
            block.layer_index, block.v_min, block.v_max, block.symbol_count,
            len(block.payload)),
        struct.pack('<{0}I'.format(len(block.shape)), *block.shape),
    ]
    if block.degenerate:
        parts.append(DEGENERATE_SYMBOL.pack(block.degenerate_symbol))
    else:
        parts.append(block.code_lengths)
    parts.append(block.payload)
    return b''.join(parts)


def block_from_bytes(data):
    """
    Parses a serialized block.

    Raises:
        TruncatedPayloadError: The data ends before the declared payload.
        CodecError: The data is not a block of a known format version.
    """
    if len(data) < HEADER.size:
        raise TruncatedPayloadError('header incomplete')
    (magic, version, flags, bit_depth, ndim, layer_index, v_min, v_max,
     symbol_count, payload_length) = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CodecError('not a feature block (magic {0!r})'.format(magic))
    if version != FORMAT_VERSION:
        raise CodecError('unsupported block format version {0}'.format(
            version))
    _check_codec_bit_depth(bit_depth)
    offset = HEADER.size
    shape_format = '<{0}I'.format(ndim)
    if len(data) < offset + struct.calcsize(shape_format):
        raise TruncatedPayloadError('shape incomplete')
    shape = struct.unpack_from(shape_format, data, offset)
    offset += struct.calcsize(shape_format)
    degenerate_symbol = None
    lengths = None
    if flags & FLAG_DEGENERATE:
        if len(data) < offset + DEGENERATE_SYMBOL.size:
            raise TruncatedPayloadError('symbol incomplete')
        degenerate_symbol = DEGENERATE_SYMBOL.unpack_from(data, offset)[0]
        offset += DEGENERATE_SYMBOL.size
    else:
        table_size = 1 << bit_depth
        if len(data) < offset + table_size:
            raise TruncatedPayloadError('code-length table incomplete')
        lengths = bytes(data[offset:offset + table_size])
        offset += table_size
    payload = bytes(data[offset:offset + payload_length])
    if len(payload) < payload_length:
        raise TruncatedPayloadError(
            '{0} of {1} payload bytes'.format(len(payload), payload_length))
    return EncodedBlock(
        layer_index=layer_index,
        bit_depth=bit_depth,
        shape=tuple(shape),
        v_min=v_min,
        v_max=v_max,
        passthrough=bool(flags & FLAG_PASSTHROUGH),
        symbol_count=symbol_count,
        code_lengths=lengths,
        degenerate_symbol=degenerate_symbol,
        payload=payload)
