"""Binary container for layered depth images.

Layout, all little-endian:

    magic       4 bytes   b'LDI1'
    header      3 x u32   width, height, total sample count
    counts      height * width x u16, row-major
    samples     total x (rgba 4 x u8, depth f32 meters, layer u16)

Colors are stored with 8 bits per channel, depths as 32-bit floats.
"""


import struct

import numpy as np

import layeredDepth.io.logger as LOG
from layeredDepth.errors import BadMagicError, TruncatedFileError, LdiFormatError
from layeredDepth.data_model.ldi import Ldi


MAGIC = b'LDI1'
HEADER = struct.Struct('<4sIII')
SAMPLE_DTYPE = np.dtype([('rgba', 'u1', (4,)), ('depth', '<f4'), ('layer', '<u2')])


def encode_ldi(ldi):
    """Function that serializes an LDI

    Returns
    -------
    bytes
        container content
    """

    if ldi.max_layers > np.iinfo(np.uint16).max:
        raise LdiFormatError('Pixels hold more samples than the container can count')
    if ldi.total and (ldi.layer.min() < 0 or ldi.layer.max() > np.iinfo(np.uint16).max):
        raise LdiFormatError('Layer indices do not fit the container')
    samples = np.zeros(ldi.total, dtype=SAMPLE_DTYPE)
    samples['rgba'] = np.round(np.clip(ldi.rgba, 0.0, 1.0) * 255.0).astype(np.uint8)
    samples['depth'] = ldi.depth.astype('<f4')
    samples['layer'] = ldi.layer.astype('<u2')
    return (HEADER.pack(MAGIC, ldi.width, ldi.height, ldi.total)
            + ldi.counts.astype('<u2').tobytes()
            + samples.tobytes())


def decode_ldi(data):
    """Function that parses container content

    Returns
    -------
    Ldi
        decoded LDI, colors quantized to 8 bits and depths to float32
    """

    if len(data) < HEADER.size:
        raise TruncatedFileError('LDI container holds {} bytes, the header alone needs {}'.format(len(data), HEADER.size))
    magic, width, height, total = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError('Not an LDI container, magic bytes are {!r}'.format(magic))

    counts_size = width * height * 2
    expected = HEADER.size + counts_size + total * SAMPLE_DTYPE.itemsize
    if len(data) < expected:
        raise TruncatedFileError('LDI container holds {} bytes, expected {}'.format(len(data), expected))
    if len(data) > expected:
        raise LdiFormatError('LDI container has {} trailing bytes'.format(len(data) - expected))

    counts = np.frombuffer(data, dtype='<u2', count=width * height, offset=HEADER.size).reshape(height, width)
    if int(counts.sum()) != total:
        raise TruncatedFileError('Per-pixel counts sum to {} but the header announces {} samples'.format(int(counts.sum()), total))
    samples = np.frombuffer(data, dtype=SAMPLE_DTYPE, count=total, offset=HEADER.size + counts_size)
    return Ldi(counts.astype(np.int64), samples['rgba'].astype(np.float64) / 255.0,
               samples['depth'].astype(np.float64), samples['layer'].astype(np.int64))


def save_ldi(ldi, path):
    """Function that writes an LDI container file

    Parameters
    ----------
    ldi : Ldi
        LDI to write
    path : str
        output file
    """

    with open(path, 'wb') as ldi_file:
        ldi_file.write(encode_ldi(ldi))
    LOG.debug('Saved LDI with {} samples to {}'.format(ldi.total, path))


def load_ldi(path):
    """Function that reads an LDI container file

    Returns
    -------
    Ldi
        decoded LDI
    """

    with open(path, 'rb') as ldi_file:
        data = ldi_file.read()
    return decode_ldi(data)


def quantize_ldi(ldi):
    """Function that applies the container's color and depth precision to an in-memory LDI

    Returns
    -------
    Ldi
        LDI equal to load_ldi(save_ldi(ldi))
    """

    return decode_ldi(encode_ldi(ldi))
