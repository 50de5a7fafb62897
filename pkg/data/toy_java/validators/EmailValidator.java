package toy.validators;

/** Requires a plausible mailbox address. */
public class EmailValidator extends Validator {

    /**
     * Validates the given input against the email validator rules and domain.
     */
    @Override
    public boolean validate(String input) {
        int at = input.indexOf('@');
        int domain = input.lastIndexOf('.');
        return at > 0 && domain > at + 1 && domain < input.length() - 1;
    }

    /** Returns the failure message of the email validator. */
    @Override
    public String message() {
        return "expected user@host";
    }

    /** Returns the severity level of the email validator. */
    @Override
    public int severity() {
        return 3;
    }
}
