class TaxRules {
public:
  int dummy(){
    return 0;
  }
  static double taxFor(double price){
    double tax = price * 2;
    return tax;
  }
};
class Order {
public:
  double total(double price){
    return TaxRules::taxFor(price);
  }
};
