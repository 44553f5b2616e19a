import csv
import json
import os
import time

import numpy as np

from .error_handling import print_debug, print_warning, ConfigError
from .settings import GLOBAL_DEBUG, FLOAT_DIGITS


def complex_to_pair(z: complex) -> list[float]:
    """
    Serializes a complex number as [re, im].
    """
    z = complex(z)
    return [float(z.real), float(z.imag)]


def pair_to_complex(value) -> complex:
    """
    Reads a complex number given as [re, im], a plain number or a string like "0.5+2i".
    :param value: Value to convert
    :type value: list | float | int | str
    :return: The complex number
    :rtype: complex
    """
    if isinstance(value, (list, tuple)):
        if len(value) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"Complex value must be a pair [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, bool):
        raise ConfigError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ConfigError(f"Not a complex number: {value!r}") from None
    raise ConfigError(f"Not a complex number: {value!r}")


def format_float(value: float) -> str:
    """
    Formats a float with 17 significant digits, so that it reads back to the same double.
    """
    return f"{float(value):.{FLOAT_DIGITS}g}"


def to_serializable(obj):
    """
    Recursively converts complex numbers, numpy scalars and arrays to JSON-compatible values.
    """
    if isinstance(obj, dict):
        return {str(k): to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_serializable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_serializable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_pair(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps_json(data) -> str:
    return json.dumps(to_serializable(data), indent=2, sort_keys=True)


def save_json(data, file_name: str, force: bool = False, debug: bool = GLOBAL_DEBUG) -> bool:
    """
    Saves data as JSON. If the file already exists and force is not set to True, nothing is changed.
    :param data: Data to save, may contain complex numbers and numpy values
    :type data: Any
    :param file_name: Name of the file to save to
    :type file_name: str
    :param force: True if the file should be overwritten if it already exists
    :type force: bool
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: True if the file was written
    :rtype: bool
    """
    if debug:
        start_time = time.perf_counter()
    if not force and os.path.exists(file_name) and os.path.getsize(file_name) != 0:
        print_warning(f"File {file_name} already exists. Nothing was changed")
        return False
    with open(file_name, "w") as file:
        file.write(dumps_json(data))
        file.write("\n")
    if debug:
        print_debug(f"JSON file {file_name} saved in {(time.perf_counter() - start_time):.6f} seconds")
    return True


def load_json(file_name: str) -> dict:
    """
    Loads a JSON file.
    :param file_name: Name of the file
    :type file_name: str
    :return: Parsed content
    :rtype: dict
    """
    try:
        with open(file_name, "r") as file:
            return json.load(file)
    except FileNotFoundError:
        raise ConfigError(f"File '{file_name}' not found.") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"File '{file_name}' is not valid JSON: {e}") from None


def write_csv(stream, header: list[str], rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def save_csv(header: list[str], rows, file_name: str, force: bool = False, debug: bool = GLOBAL_DEBUG) -> bool:
    """
    Saves rows as comma-separated values with a header row. Floats are written with 17 significant digits.
    :param header: Column names
    :type header: list[str]
    :param rows: Iterable of rows, each an iterable of ints, floats or strings
    :type rows: Iterable
    :param file_name: Name of the file to save to
    :type file_name: str
    :param force: True if the file should be overwritten if it already exists
    :type force: bool
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: True if the file was written
    :rtype: bool
    """
    if debug:
        start_time = time.perf_counter()
    if not force and os.path.exists(file_name) and os.path.getsize(file_name) != 0:
        print_warning(f"File {file_name} already exists. Nothing was changed")
        return False
    with open(file_name, "w", newline="") as file:
        write_csv(file, header, rows)
    if debug:
        print_debug(f"CSV file {file_name} saved in {(time.perf_counter() - start_time):.6f} seconds")
    return True
