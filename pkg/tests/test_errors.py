import inspect

from detlens import errors


def all_error_classes():
    return [
        obj for _, obj in inspect.getmembers(errors, inspect.isclass)
        if issubclass(obj, errors.DetlensError)
        and obj not in (errors.DetlensError, errors.IngestError)
    ]


def test_every_error_has_a_unique_code():
    codes = [cls.code for cls in all_error_classes()]
    assert "error" not in codes
    assert len(set(codes)) == len(codes)


def test_every_error_has_a_mappable_category():
    for cls in all_error_classes():
        assert cls.category in ("validation", "missing", "conflict", "corrupt"), cls
