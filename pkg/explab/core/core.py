# License: BSD 3-clause
import logging
import numbers
import os
import queue
import sys
import threading
import time
import uuid

logging.basicConfig(level=logging.INFO,
                    format='%(message)s')
logger = logging.getLogger(__name__)


def get_logger():
    """
    Fetch the global explab logger.
    """
    return logger


def set_verbosity(verbose):
    if verbose:
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.INFO)


class ExplabError(Exception):
    """
    Root of every error raised by explab.
    """
    pass


class ChannelError(ExplabError, ValueError):
    pass


class NonStochasticRowError(ChannelError):
    pass


class NegativeEntryError(ChannelError):
    pass


class AlphabetTooSmallError(ChannelError):
    pass


class DegenerateChannelError(ChannelError):
    pass


class InfiniteDistanceError(ChannelError):
    pass


class RhoOutOfRangeError(ExplabError, ValueError):
    pass


class RateOutOfRangeError(ExplabError, ValueError):
    pass


class LengthMismatchError(ExplabError, ValueError):
    pass


class SupportViolationError(ExplabError, ValueError):
    pass


class EnumerationTooLargeError(ExplabError, ValueError):
    pass


class InstanceTooLargeError(ExplabError, ValueError):
    pass


class TooFewSamplesError(ExplabError, ValueError):
    pass


class NonConvergenceError(ExplabError, ArithmeticError):
    pass


class BracketExhaustedError(ExplabError, ArithmeticError):
    pass


class DivergingError(ExplabError, ArithmeticError):
    pass


class BisectionFailureError(ExplabError, ArithmeticError):
    pass


class EmptyFeasibleSetError(ExplabError, ArithmeticError):
    pass


class QuadratureFailureError(ExplabError, ArithmeticError):
    pass


# universal time
tt = str(time.time()).split(".")[0]
def get_time_string():
    return tt


def get_name():
    base = str(uuid.uuid4())
    return base


DEFAULT_SEED = 1999


def get_seed(seed=None):
    """
    Resolve the master seed. EXPLAB_SEED wins over the argument when set.

    Parameters
    ----------
    seed : int or None, default None
        Requested seed. None falls back to DEFAULT_SEED.

    Returns
    -------
    seed : int
        A nonnegative integer seed

    """
    env_seed = os.getenv("EXPLAB_SEED")
    if env_seed is not None and env_seed.strip() != "":
        try:
            seed = int(env_seed)
        except ValueError:
            raise ValueError("EXPLAB_SEED must be an integer, got %r" % env_seed)
        logger.info("Using seed %i from EXPLAB_SEED" % seed)
    if seed is None:
        seed = DEFAULT_SEED
    if not isinstance(seed, numbers.Integral) or seed < 0:
        raise ValueError("Seed must be a nonnegative integer, got %r" % seed)
    return int(seed)


def safe_zip(*args):
    """ zip that refuses arguments of different lengths """
    base = len(args[0])
    for i, arg in enumerate(args[1:]):
        if len(arg) != base:
            raise LengthMismatchError("Argument 0 has length %d but argument "
                                      "%d has length %d" % (base, i+1, len(arg)))
    return zip(*args)


def get_script():
    py_file = None
    for argv in sys.argv[::-1]:
        if argv[-3:] == ".py":
            py_file = argv
    if py_file is None:
        return os.path.basename(sys.argv[0]) or "explab"
    script_path = os.path.abspath(py_file)
    return script_path.split(os.path.sep)[-1].split(".")[0]


# decided at import, should be consistent over a run
run_uuid = get_name()[:6]
def get_output_dir(output_dir=None, folder=None, create_dir=True):
    """ Get output directory path """
    if output_dir is None:
        output_dir = os.getenv("EXPLAB_OUTPUT", os.path.join(
            os.path.expanduser("~"), "explab_runs"))
        if folder is None:
            folder = get_script() + "_" + get_time_string() + "_" + run_uuid

    if folder is not None:
        output_dir = os.path.join(output_dir, folder)

    if not os.path.exists(output_dir) and create_dir:
        os.makedirs(output_dir)
    return output_dir


def threaded_map(func, list_of_args, n_threads=1, maxsize=0):
    """
    Apply func to every element of list_of_args on a pool of worker threads

    Results come back in the order of list_of_args no matter how the work was
    scheduled, so the output does not depend on n_threads.

    Parameters
    ----------
    func : callable
        Called as func(item) for each item

    list_of_args : sequence
        Work items

    n_threads : int, default 1
        Number of worker threads. 1 runs inline.

    maxsize : int, default 0
        Queue bound, 0 for unbounded

    Returns
    -------
    results : list
        func(item) for each item, in input order

    """
    n_items = len(list_of_args)
    if n_threads < 1:
        raise ValueError("n_threads must be >= 1, got %i" % n_threads)
    if n_threads == 1 or n_items <= 1:
        return [func(a) for a in list_of_args]

    messages = queue.Queue(maxsize=maxsize)
    results = [None] * n_items
    errors = []
    lock = threading.Lock()

    def run_thread():
        while True:
            n, item = messages.get()
            if item is GeneratorExit:
                return
            try:
                results[n] = func(item)
            except BaseException as e:
                with lock:
                    errors.append((n, e))

    threads = [threading.Thread(target=run_thread)
               for i in range(min(n_threads, n_items))]
    for t in threads:
        t.daemon = True
        t.start()
    for n, item in enumerate(list_of_args):
        messages.put((n, item))
    for t in threads:
        messages.put((n_items, GeneratorExit))
    for t in threads:
        t.join()
    if len(errors) > 0:
        # surface the failure of the lowest index for reproducible reporting
        errors.sort(key=lambda x: x[0])
        raise errors[0][1]
    return results
