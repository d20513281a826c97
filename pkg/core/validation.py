# validation.py - Input validation helper functions

import logging
import math
from typing import Optional, Tuple

from core.exceptions import ValidationError

logger = logging.getLogger(__name__)


def ensure_valid(result: Tuple[bool, Optional[str]], field_name: str) -> None:
    """Raise ValidationError when a validator reported failure.

    Args:
        result: (is_valid, error_message) pair from one of the validators
        field_name: Field reported in the exception

    Raises:
        ValidationError: If result[0] is False
    """
    is_valid, error_msg = result
    if not is_valid:
        raise ValidationError(field_name, error_msg)


def validate_float_range(
    value: float,
    min_value: Optional[float] = None,
    max_value: Optional[float] = None,
    field_name: str = "field",
    min_inclusive: bool = True,
    max_inclusive: bool = True,
) -> Tuple[bool, Optional[str]]:
    """Validate that a real number is finite and within a range.

    Args:
        value: The value to validate
        min_value: Lower bound (optional)
        max_value: Upper bound (optional)
        field_name: Name of the field for error messages
        min_inclusive: Whether value == min_value is allowed
        max_inclusive: Whether value == max_value is allowed

    Returns:
        Tuple[bool, Optional[str]]: (is_valid, error_message)
        - If valid: (True, None)
        - If invalid: (False, error_message)
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False, f"{field_name} must be a real number"

    if not math.isfinite(value):
        return False, f"{field_name} must be finite"

    if min_value is not None:
        if min_inclusive and value < min_value:
            return False, f"{field_name} must be at least {min_value}"
        if not min_inclusive and value <= min_value:
            return False, f"{field_name} must be greater than {min_value}"

    if max_value is not None:
        if max_inclusive and value > max_value:
            return False, f"{field_name} must be at most {max_value}"
        if not max_inclusive and value >= max_value:
            return False, f"{field_name} must be less than {max_value}"

    return True, None


def validate_int_range(
    value: int,
    min_value: Optional[int] = None,
    max_value: Optional[int] = None,
    field_name: str = "field",
) -> Tuple[bool, Optional[str]]:
    """Validate that an integer is within a specified range.

    Args:
        value: The integer value to validate
        min_value: Minimum allowed value (inclusive, optional)
        max_value: Maximum allowed value (inclusive, optional)
        field_name: Name of the field for error messages

    Returns:
        Tuple[bool, Optional[str]]: (is_valid, error_message)
    """
    if isinstance(value, bool) or not isinstance(value, int):
        return False, f"{field_name} must be an integer"

    if min_value is not None and value < min_value:
        return False, f"{field_name} must be at least {min_value}"

    if max_value is not None and value > max_value:
        return False, f"{field_name} must be at most {max_value}"

    return True, None


def validate_in_list(
    value: Optional[str], valid_values: list[str], field_name: str = "field"
) -> Tuple[bool, Optional[str]]:
    """Validate that a value is in a list of valid values.

    Args:
        value: The value to validate (can be None)
        valid_values: List of valid string values
        field_name: Name of the field for error messages

    Returns:
        Tuple[bool, Optional[str]]: (is_valid, error_message)
    """
    if value is None:
        return False, f"{field_name} is required"

    stripped = str(value).strip()
    if not stripped:
        return False, f"{field_name} cannot be empty"

    if stripped not in valid_values:
        return False, f"{field_name} must be one of: {', '.join(valid_values)}"

    return True, None


def parse_int(
    value: Optional[str], field_name: str = "field", default: Optional[int] = None
) -> Tuple[Optional[int], Optional[str]]:
    """Parse a string to an integer with validation.

    Args:
        value: The value to parse (can be None or empty string)
        field_name: Name of the field for error messages
        default: Default value to return if value is None or empty (optional)

    Returns:
        Tuple[Optional[int], Optional[str]]: (parsed_value, error_message)
        - If successful: (int_value, None)
        - If value is None/empty: (default, None)
        - If parsing fails: (None, error_message)
    """
    if value is None or (isinstance(value, str) and not value.strip()):
        return default, None

    try:
        return int(str(value).strip()), None
    except (ValueError, TypeError) as e:
        logger.warning(f"Failed to parse {field_name} as integer: {value} - {e}")
        return None, f"{field_name} must be a valid integer"


def parse_float(
    value: Optional[str], field_name: str = "field", default: Optional[float] = None
) -> Tuple[Optional[float], Optional[str]]:
    """Parse a string to a float with validation.

    Returns:
        Tuple[Optional[float], Optional[str]]: (parsed_value, error_message)
        with the same conventions as parse_int
    """
    if value is None or (isinstance(value, str) and not value.strip()):
        return default, None

    try:
        parsed = float(str(value).strip())
    except (ValueError, TypeError) as e:
        logger.warning(f"Failed to parse {field_name} as float: {value} - {e}")
        return None, f"{field_name} must be a valid number"

    if not math.isfinite(parsed):
        return None, f"{field_name} must be finite"
    return parsed, None


def parse_int_list(
    value: Optional[str], field_name: str = "field"
) -> Tuple[Optional[list[int]], Optional[str]]:
    """Parse a comma or whitespace separated list of integers.

    Returns:
        Tuple[Optional[list[int]], Optional[str]]: (values, error_message);
        an empty or missing value parses to (None, None)
    """
    if value is None or not str(value).strip():
        return None, None

    values = []
    for token in str(value).replace(",", " ").split():
        parsed, error_msg = parse_int(token, field_name)
        if error_msg:
            return None, error_msg
        values.append(parsed)
    return values, None
