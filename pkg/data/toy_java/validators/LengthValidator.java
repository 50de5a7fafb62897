package toy.validators;

/** Requires a string length within closed bounds. */
public class LengthValidator extends Validator {

    private final int min;
    private final int max;

    public LengthValidator(int min, int max) {
        this.min = min;
        this.max = max;
    }

    /**
     * Validates the given input against the length validator rules within bounds.
     */
    @Override
    public boolean validate(String input) {
        boolean bounds = input.length() >= min && input.length() <= max;
        return bounds;
    }

    /** Returns the failure message of the length validator and the range. */
    @Override
    public String message() {
        String range = min + ".." + max;
        return "length outside " + range;
    }

    /** Returns the severity level of the length validator. */
    @Override
    public int severity() {
        return 2;
    }
}
