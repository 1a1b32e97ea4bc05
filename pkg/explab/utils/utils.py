# License: BSD 3-clause
import csv
import hashlib
import json
import numpy as np

from ..core import get_logger

logger = get_logger()

LN2 = np.log(2.)
UNITS = ("nats", "bits")

# bits set in every byte value
POPCOUNT_TABLE = np.array([bin(i).count("1") for i in range(256)],
                          dtype=np.uint8)


def check_unit(unit):
    if unit not in UNITS:
        raise ValueError("Unknown unit %s, expected one of %s" % (unit, UNITS))
    return unit


def to_unit(values, unit):
    """ Convert nats to the requested unit """
    check_unit(unit)
    if unit == "bits":
        return np.asarray(values, dtype="float64") / LN2
    return np.asarray(values, dtype="float64")


def from_unit(values, unit):
    """ Convert values given in unit to nats """
    check_unit(unit)
    if unit == "bits":
        return np.asarray(values, dtype="float64") * LN2
    return np.asarray(values, dtype="float64")


def rate_grid(stop, n_points, start=0., include_stop=False):
    """
    Helper function for making evenly spaced rates in [start, stop)

    Parameters
    ----------
    stop : float
        Upper end of the grid, excluded unless include_stop

    n_points : int
        Number of rates

    start : float, default 0.
        First rate

    include_stop : bool, default False
        Whether the last point is stop itself

    Returns
    -------
    rates : array, shape (n_points,)

    """
    assert n_points > 1
    assert stop > start
    if include_stop:
        return np.linspace(start, stop, n_points)
    step = (stop - start) / float(n_points)
    return start + step * np.arange(n_points)


def pack_codewords(symbols):
    """
    Pack binary codewords, one per row, into uint8 words

    Trailing pad bits are zero, so XOR-ing two packed rows never counts them.
    """
    symbols = np.asarray(symbols)
    if symbols.size > 0 and symbols.max() > 1:
        raise ValueError("Only binary codewords can be bit packed")
    return np.packbits(symbols.astype(np.uint8), axis=-1)


def unpack_codewords(packed, n):
    return np.unpackbits(packed, axis=-1, count=n)


def popcount(packed, axis=-1):
    """ Number of set bits along axis of a uint8 array """
    return POPCOUNT_TABLE[packed].sum(axis=axis, dtype=np.int64)


def hamming_distance_packed(a, b):
    """ Hamming distance between packed rows, broadcast over leading axes """
    return popcount(np.bitwise_xor(a, b))


def format_number(x):
    """ 12 significant digits, stable across platforms """
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.12g" % x


def write_csv(save_path, header, rows):
    """
    Write rows of numbers (or strings) as CSV with a fixed number format

    Parameters
    ----------
    save_path : str

    header : list of str

    rows : iterable of sequences

    """
    with open(save_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else format_number(v)
                             for v in row])
    logger.debug("Wrote %s" % save_path)
    return save_path


def read_csv(save_path):
    with open(save_path, "r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [r for r in reader]
    return header, rows


def write_json(save_path, obj):
    with open(save_path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug("Wrote %s" % save_path)
    return save_path


def read_json(save_path):
    with open(save_path, "r") as f:
        return json.load(f)


def array_digest(arr):
    """ sha256 of the float64 little endian bytes of arr """
    arr = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
    return hashlib.sha256(arr.tobytes()).hexdigest()


class trial_iterator(object):
    """
    Iterate over trial indices in contiguous chunks

    Each step returns an array of trial indices. The last chunk may be short.
    """
    def __init__(self, n_trials, chunk_size, start_index=0):
        if chunk_size < 1:
            raise ValueError("chunk_size must be >= 1, got %i" % chunk_size)
        self.n_trials = n_trials
        self.chunk_size = chunk_size
        self.start_index = start_index
        self.slice_start_ = start_index

    def reset(self):
        self.slice_start_ = self.start_index

    def __iter__(self):
        return self

    def __len__(self):
        n = self.n_trials - self.start_index
        return max(0, (n + self.chunk_size - 1) // self.chunk_size)

    def next(self):
        return self.__next__()

    def __next__(self):
        if self.slice_start_ >= self.n_trials:
            self.reset()
            raise StopIteration("Stop index reached")
        self.slice_end_ = min(self.slice_start_ + self.chunk_size,
                              self.n_trials)
        ind = np.arange(self.slice_start_, self.slice_end_)
        self.slice_start_ = self.slice_end_
        return ind
