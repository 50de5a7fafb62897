package toy.validators;

/**
 * Checks user supplied strings against one rule.
 */
public abstract class Validator {

    /**
     * Validates the given input against the validator rules.
     *
     * @param input the candidate string
     * @return true when the input passes
     */
    public abstract boolean validate(String input);

    /**
     * Returns the failure message of the validator.
     */
    public String message() {
        return "invalid input";
    }

    /** Returns the severity level of the validator. */
    public int severity() {
        return 1;
    }
}
